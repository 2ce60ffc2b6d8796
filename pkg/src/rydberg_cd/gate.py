"""CZ protocols, ideal single-qubit gates and Bell-state scoring."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import dynamics
from .model import INFINITE, DecayChannel, LevelScheme, TwoAtomSystem, lindblad_operators
from .pulsegen import (
    PhaseJumpDrive,
    PhaseJumpParams,
    PulseParams,
    SinglePhotonDrive,
    ThreePhotonDrive,
    ThreePhotonPulseParams,
    TwoPhotonDrive,
    TwoPhotonPulseParams,
)

LOGICAL_INPUTS = ("00", "01", "10", "11")
HADAMARD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhaseJumpSpec:
    """Phase-jump protocol settings; Omega2 and Omega3 come from the enclosing config.

    Give either ``omega1`` directly or ``effective_rabi`` = Omega1*Omega3/Omega2.
    """

    delta: float
    half_time: float
    delta_psi: float
    effective_rabi: float | None = None
    omega1: float | None = None

    def __post_init__(self):
        if (self.effective_rabi is None) == (self.omega1 is None):
            raise ValueError("phase_jump needs exactly one of effective_rabi or omega1")


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything needed to simulate one CZ gate.

    Attribute paths (``pulse.omega_max``, ``blockade``, ``Delta``,
    ``omega2``...) are what sweeps and the optimiser address.
    """

    scheme_kind: str = "single_photon"
    protocol: str = "cd_arp"
    pulse: PulseParams | None = None
    Delta: float | None = None
    effective_sign: int = 1
    omega2: float | None = None
    omega3: float | None = None
    phase_jump: PhaseJumpSpec | None = None
    blockade: float = INFINITE
    decay: tuple = ()
    species: str | None = None
    phase_correction: object = "auto"
    final_hadamard: str = "target"
    rtol: float = dynamics.DEFAULT_RTOL
    atol: float = dynamics.DEFAULT_ATOL
    n_samples: int = 4001
    commutator_sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "decay", tuple(self.decay))
        if self.protocol not in ("cd_arp", "phase_jump"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.protocol == "phase_jump":
            if self.scheme_kind != "three_photon":
                raise ValueError("the phase_jump protocol is defined for the three_photon scheme only")
            if self.phase_jump is None:
                raise ValueError("phase_jump protocol needs phase_jump settings")
        elif self.pulse is None:
            raise ValueError("cd_arp protocol needs pulse parameters")
        if self.scheme_kind == "two_photon" and self.Delta is None:
            raise ValueError("two_photon scheme needs Delta")
        if self.scheme_kind == "three_photon" and (self.omega2 is None or self.omega3 is None):
            raise ValueError("three_photon scheme needs omega2 and omega3")
        if self.final_hadamard not in ("target", "control"):
            raise ValueError("final_hadamard must be 'target' or 'control'")
        if not (self.phase_correction in ("auto", "none") or isinstance(self.phase_correction, (int, float))):
            raise ValueError(f"phase_correction must be 'auto', 'none' or a phase, got {self.phase_correction!r}")

    def scheme(self, with_decay: bool = True) -> LevelScheme:
        return LevelScheme(self.scheme_kind, self.decay if with_decay else ())

    def system(self, with_decay: bool = True) -> TwoAtomSystem:
        return TwoAtomSystem(self.scheme(with_decay), self.blockade)

    def drive(self):
        kind = self.scheme_kind
        if kind == "single_photon":
            return SinglePhotonDrive(self.pulse)
        if kind == "two_photon":
            return TwoPhotonDrive(TwoPhotonPulseParams(self.pulse, self.Delta, self.effective_sign))
        if self.protocol == "phase_jump":
            pj = self.phase_jump
            if pj.omega1 is not None:
                params = PhaseJumpParams(pj.omega1, pj.delta, pj.half_time, pj.delta_psi, self.omega2, self.omega3)
            else:
                params = PhaseJumpParams.from_effective_rabi(
                    pj.effective_rabi, pj.delta, pj.half_time, pj.delta_psi, self.omega2, self.omega3
                )
            return PhaseJumpDrive(params)
        return ThreePhotonDrive(ThreePhotonPulseParams(self.pulse, self.omega2, self.omega3))

    @property
    def has_decay(self) -> bool:
        return self.scheme().has_decay

    def set(self, path: str, value) -> "ProtocolConfig":
        """Copy with the attribute at dotted ``path`` replaced."""
        return _set_path(self, path, value)

    def get(self, path: str):
        obj = self
        for part in path.split("."):
            obj = getattr(obj, part)
        return obj


def _set_path(obj, path, value):
    head, _, rest = path.partition(".")
    if not hasattr(obj, head):
        raise AttributeError(f"{type(obj).__name__} has no field {head!r}")
    if rest:
        return replace(obj, **{head: _set_path(getattr(obj, head), rest, value)})
    return replace(obj, **{head: value})


@dataclass
class GateRun:
    """Outcome of one simulated CZ pulse sequence on the four logical inputs.

    Phases are wrapped to (-pi, pi] and measured relative to the ``|00>``
    amplitude.  In Lindblad mode they come from the zero-decay pure-state
    run of the same pulses.
    """

    labels: list
    final_states: dict
    phases: dict
    return_populations: dict
    leakage: dict
    mode: str
    duration: float
    wall_clock: float
    meta: dict = field(default_factory=dict)

    @property
    def phi01(self):
        return self.phases["01"]

    @property
    def phi10(self):
        return self.phases["10"]

    @property
    def phi11(self):
        return self.phases["11"]

    def unitary_block(self) -> np.ndarray:
        """4x4 logical block of the gate map (pure runs only)."""
        if self.mode != "pure":
            raise ValueError("logical block is defined for pure-state runs")
        idx = [self.labels.index(lab) for lab in LOGICAL_INPUTS]
        return np.array([[self.final_states[col][row] for col in LOGICAL_INPUTS] for row in idx])

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "phases_rad": {k: float(v) for k, v in self.phases.items()},
            "cz_conditional_phase_rad": float(cz_conditional_phase(self)),
            "return_populations": {k: float(v) for k, v in self.return_populations.items()},
            "leakage": {k: float(v) for k, v in self.leakage.items()},
            "duration_us": self.duration,
            "wall_clock_s": self.wall_clock,
            "meta": self.meta,
        }


def wrap_phase(phi):
    """Wrap to (-pi, pi]."""
    out = np.pi - np.mod(np.pi - np.asarray(phi, dtype=float), 2 * np.pi)
    return float(out) if np.ndim(out) == 0 else out


def _leakage(populations: np.ndarray, labels: list) -> float:
    computational = [i for i, lab in enumerate(labels) if set(lab) <= {"0", "1", "r"}]
    return float(1.0 - populations[computational].sum())


def run_cz(config: ProtocolConfig, with_decay: bool | None = None) -> GateRun:
    """Propagate the four logical inputs through the pulse sequence.

    Without decay the inputs are propagated together as columns of one
    pure-state integration.  With decay each input is a separate Lindblad
    run, and phases are taken from an extra zero-decay run.
    """
    if with_decay is None:
        with_decay = config.has_decay
    start = time.perf_counter()
    drive = config.drive()
    system = config.system(with_decay)
    H = system.hamiltonian(drive)
    labels = system.labels
    span = drive.span

    def pure_run():
        psi0 = np.stack([system.basis_state(lab) for lab in LOGICAL_INPUTS], axis=1)
        try:
            traj = dynamics.propagate_schrodinger(
                H, psi0, span, rtol=config.rtol, atol=config.atol, n_samples=config.n_samples,
                sign=config.commutator_sign, labels=labels, keep_states=False,
            )
        except dynamics.PropagationError as exc:
            raise dynamics.PropagationError(f"logical inputs {LOGICAL_INPUTS}: {exc}") from exc
        return traj

    pure = pure_run() if not with_decay else None
    if with_decay:
        calib = run_cz(config, with_decay=False)
        phases = calib.phases
        finals, ret, leak = {}, {}, {}
        L_ops = lindblad_operators(system)
        nfev = 0
        for lab in LOGICAL_INPUTS:
            try:
                traj = dynamics.propagate_lindblad(
                    H, L_ops, system.basis_state(lab), span, rtol=config.rtol, atol=config.atol,
                    n_samples=config.n_samples, sign=config.commutator_sign, labels=labels,
                )
            except dynamics.PropagationError as exc:
                raise dynamics.PropagationError(f"input |{lab}>: {exc}") from exc
            rho = traj.final_state
            finals[lab] = rho
            ret[lab] = float(rho[system.index(lab), system.index(lab)].real)
            leak[lab] = _leakage(np.diag(rho).real, labels)
            nfev += traj.meta["nfev"]
        mode = "lindblad"
    else:
        final = pure.final_state
        finals = {lab: final[:, k] for k, lab in enumerate(LOGICAL_INPUTS)}
        ref = np.angle(finals["00"][system.index("00")])
        phases, ret, leak = {}, {}, {}
        for lab in LOGICAL_INPUTS:
            amp = finals[lab][system.index(lab)]
            if abs(amp) < 1e-6:
                phases[lab] = float("nan")
            else:
                phases[lab] = wrap_phase(np.angle(amp) - ref)
            ret[lab] = float(abs(amp) ** 2)
            leak[lab] = _leakage(np.abs(finals[lab]) ** 2, labels)
        nfev = pure.meta["nfev"]
        mode = "pure"
    return GateRun(
        labels=labels,
        final_states=finals,
        phases=phases,
        return_populations=ret,
        leakage=leak,
        mode=mode,
        duration=span[1] - span[0],
        wall_clock=time.perf_counter() - start,
        meta={"nfev": int(nfev), "rtol": config.rtol, "atol": config.atol},
    )


def cz_conditional_phase(run: GateRun) -> float:
    """``wrap(phi11 + phi00 - phi01 - phi10)``; equals -wrap(2 phi01 - phi11) for symmetric runs."""
    p = run.phases
    return wrap_phase(p["11"] + p["00"] - p["01"] - p["10"])


def two_phi01_minus_phi11(run: GateRun) -> float:
    return wrap_phase(2 * run.phases["01"] - run.phases["11"])


def cz_phase_defect(run: GateRun) -> float:
    """Distance of the conditional phase from +-pi."""
    return float(math.pi - abs(cz_conditional_phase(run)))


# ---------------------------------------------------------------------------
# ideal single-qubit operations


def _logical_op(system: TwoAtomSystem, u2: np.ndarray, which_atom: str) -> np.ndarray:
    sc = system.scheme
    op = np.eye(sc.n, dtype=complex)
    q = [sc.index("0"), sc.index("1")]
    op[np.ix_(q, q)] = u2
    return system.embed(op, which_atom)


def _apply(op: np.ndarray, state: np.ndarray) -> np.ndarray:
    state = np.asarray(state)
    if state.shape == op.shape:
        return op @ state @ op.conj().T
    return op @ state


def ideal_hadamard(state, which_atom: str, system: TwoAtomSystem):
    """Hadamard on the {|0>, |1>} subspace of one atom; identity on other levels."""
    return _apply(_logical_op(system, HADAMARD, which_atom), state)


def ideal_phase(state, which_atom: str, phi: float, system: TwoAtomSystem):
    """``diag(1, exp(i phi))`` on the {|0>, |1>} subspace of one atom."""
    return _apply(_logical_op(system, np.diag([1, np.exp(1j * phi)]), which_atom), state)


def bell_fidelity(state, system: TwoAtomSystem) -> float:
    """``(<00|rho|00> + <11|rho|11>)/2 + |<00|rho|11>|`` for the target (|00> + |11>)/sqrt(2)."""
    state = np.asarray(state)
    i00, i11 = system.index("00"), system.index("11")
    if state.ndim == 1:
        a, b = state[i00], state[i11]
        return float((abs(a) ** 2 + abs(b) ** 2) / 2 + abs(a * np.conj(b)))
    return float((state[i00, i00].real + state[i11, i11].real) / 2 + abs(state[i00, i11]))


@dataclass
class BellScore:
    fidelity: float
    fidelity_uncorrected: float
    corrections: dict
    phases: dict
    leakage: float
    mode: str
    wall_clock: float
    state: np.ndarray = field(repr=False, default=None)

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity

    def to_dict(self) -> dict:
        return {
            "fidelity": round(self.fidelity, 6),
            "fidelity_exact": self.fidelity,
            "infidelity": self.infidelity,
            "fidelity_uncorrected": round(self.fidelity_uncorrected, 6),
            "phase_corrections_rad": self.corrections,
            "phases_rad": self.phases,
            "leakage": self.leakage,
            "mode": self.mode,
            "wall_clock_s": self.wall_clock,
        }


def bell_input(system: TwoAtomSystem) -> np.ndarray:
    """``(H x H)|00>``."""
    psi = system.basis_state("00")
    psi = ideal_hadamard(psi, "control", system)
    return ideal_hadamard(psi, "target", system)


def finish_bell(state, system: TwoAtomSystem, corrections=(0.0, 0.0), final_hadamard: str = "target"):
    """Apply per-atom phase gates (control, target) and the final Hadamard."""
    state = ideal_phase(state, "control", corrections[0], system)
    state = ideal_phase(state, "target", corrections[1], system)
    return ideal_hadamard(state, final_hadamard, system)


def correction_phases(config: ProtocolConfig, phases: dict) -> tuple[float, float]:
    mode = config.phase_correction
    if mode == "none":
        return (0.0, 0.0)
    if mode == "auto":
        if not (np.isfinite(phases["01"]) and np.isfinite(phases["10"])):
            raise CalibrationError("single-atom phase undefined: |01>/|10> did not return to the ground state")
        # control-atom phase shows on |10>, target-atom phase on |01>
        return (-phases["10"], -phases["01"])
    return (float(mode), float(mode))


def prepare_bell(config: ProtocolConfig) -> BellScore:
    """Score Bell-state preparation ``|00> -> H x H -> CZ pulses -> phase gates -> H``.

    Single-qubit phases are calibrated on a zero-decay pure-state run.
    """
    start = time.perf_counter()
    calib = run_cz(config, with_decay=False)
    corr = correction_phases(config, calib.phases)
    if config.has_decay:
        system = config.system(True)
        traj = dynamics.propagate_lindblad(
            system.hamiltonian(config.drive()), lindblad_operators(system), bell_input(system),
            config.drive().span, rtol=config.rtol, atol=config.atol, n_samples=config.n_samples,
            sign=config.commutator_sign, labels=system.labels,
        )
        after = traj.final_state
        pops = np.diag(after).real
        mode = "lindblad"
    else:
        system = config.system(False)
        after = sum(0.5 * calib.final_states[lab] for lab in LOGICAL_INPUTS)
        pops = np.abs(after) ** 2
        mode = "pure"
    corrected = finish_bell(after, system, corr, config.final_hadamard)
    uncorrected = finish_bell(after, system, (0.0, 0.0), config.final_hadamard)
    return BellScore(
        fidelity=bell_fidelity(corrected, system),
        fidelity_uncorrected=bell_fidelity(uncorrected, system),
        corrections={"control": corr[0], "target": corr[1]},
        phases=dict(calib.phases),
        leakage=_leakage(pops, system.labels),
        mode=mode,
        wall_clock=time.perf_counter() - start,
        state=corrected,
    )


def config_summary(config: ProtocolConfig) -> dict:
    """JSON-friendly echo of a config in internal units."""
    d = asdict(config)
    d["blockade"] = "infinite" if config.blockade == INFINITE else config.blockade
    d["decay"] = [asdict(ch) for ch in config.decay]
    return d


__all__ = [
    "BellScore",
    "CalibrationError",
    "DecayChannel",
    "GateRun",
    "PhaseJumpSpec",
    "ProtocolConfig",
    "bell_fidelity",
    "bell_input",
    "config_summary",
    "correction_phases",
    "cz_conditional_phase",
    "cz_phase_defect",
    "finish_bell",
    "ideal_hadamard",
    "ideal_phase",
    "prepare_bell",
    "run_cz",
    "two_phi01_minus_phi11",
    "wrap_phase",
]
