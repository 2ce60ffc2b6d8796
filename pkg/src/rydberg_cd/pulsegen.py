"""Analytic chirped pulses with counterdiabatic corrections.

Each pulse of the double adiabatic sequence has a super-Gaussian amplitude
and a sinusoidal chirp,

    Omega0(t) = Omega_max * [exp(-(t - t0)**4 / w**4) - a] / (1 - a)
    delta(t)  = delta0 * sin(pi * (t - t0) / T)

on the closed support ``[t0 - T/2, t0 + T/2]`` and zero outside.  The
offset ``a = exp(-(T/2)**4 / w**4)`` pins the amplitude to zero at the
support edges.  The counterdiabatic drive is the time derivative of twice
the mixing angle, ``tan(2 theta) = Omega0 / delta``, and enters the
Hamiltonian as an imaginary Rabi component.

All frequencies are angular (rad/us), all times in us.
"""

from __future__ import annotations

import cmath
import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DegeneratePointWarning(RuntimeWarning):
    """Both the amplitude and the detuning vanish where the CD drive is asked for."""


@dataclass(frozen=True)
class PulseParams:
    """Parameters of one chirped pulse and of the double sequence built from it.

    ``t0`` is the centre used by the single-pulse functions.  The double
    sequence ignores it and places the pulses at ``-T/2`` and ``+T/2`` on a
    clock spanning ``[-T, T]``.
    """

    omega_max: float
    delta0: float
    T: float
    t0: float = 0.0
    w: float | None = None
    second_pulse_sign: int = 1

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"pulse duration T must be positive, got {self.T}")
        if self.w is not None and not self.w > 0:
            raise ValueError(f"pulse width w must be positive, got {self.w}")
        if self.omega_max < 0:
            raise ValueError(f"omega_max must be non-negative, got {self.omega_max}")
        if self.second_pulse_sign not in (1, -1):
            raise ValueError("second_pulse_sign must be +1 or -1")

    @property
    def width(self) -> float:
        """``w``, or ``T/4`` when unset."""
        return self.T / 4 if self.w is None else self.w

    @property
    def a(self) -> float:
        return math.exp(-((self.T / 2) ** 4) / self.width**4)

    @property
    def centers(self) -> tuple[float, float]:
        return (-self.T / 2, self.T / 2)

    @property
    def span(self) -> tuple[float, float]:
        return (-self.T, self.T)


@dataclass(frozen=True)
class TwoPhotonPulseParams:
    base: PulseParams
    Delta: float
    # +1: Omega1*Omega2/(2 Delta) = -(Omega0 + i Omega_CD); -1 flips it
    effective_sign: int = 1

    def __post_init__(self):
        if not self.Delta < 0:
            raise ValueError(f"intermediate detuning Delta must be negative, got {self.Delta}")
        if self.effective_sign not in (1, -1):
            raise ValueError("effective_sign must be +1 or -1")


@dataclass(frozen=True)
class ThreePhotonPulseParams:
    base: PulseParams
    omega2: float
    omega3: float

    def __post_init__(self):
        if not self.omega3 > 0:
            raise ValueError(f"omega3 must be positive, got {self.omega3}")
        if not self.omega2 > 0:
            raise ValueError(f"omega2 must be positive, got {self.omega2}")


@dataclass(frozen=True)
class PhaseJumpParams:
    """Constant-amplitude first-step drive with a laser phase jump at mid-gate.

    The gate runs on ``[0, 2 * half_time]``; the phase ``delta_psi`` is
    applied from ``half_time`` on.  ``delta`` is the static detuning of the
    last excitation step.
    """

    omega1_amp: float
    delta: float
    half_time: float
    delta_psi: float
    omega2: float
    omega3: float

    def __post_init__(self):
        if not self.half_time > 0:
            raise ValueError(f"half_time must be positive, got {self.half_time}")
        if not self.omega3 > 0:
            raise ValueError(f"omega3 must be positive, got {self.omega3}")

    @property
    def span(self) -> tuple[float, float]:
        return (0.0, 2 * self.half_time)

    @classmethod
    def from_effective_rabi(cls, omega_eff, delta, half_time, delta_psi, omega2, omega3):
        """Build from the effective three-photon Rabi frequency Omega1*Omega3/Omega2."""
        return cls(omega_eff * omega2 / omega3, delta, half_time, delta_psi, omega2, omega3)


def _scalar_out(x):
    return float(x) if np.ndim(x) == 0 else x


# ---------------------------------------------------------------------------
# single pulse


def omega0(t, p: PulseParams):
    """Real Rabi amplitude of the pulse centred at ``p.t0``."""
    x = np.asarray(t, dtype=float) - p.t0
    inside = np.abs(x) < p.T / 2
    a = p.a
    val = p.omega_max * (np.exp(-(x**4) / p.width**4) - a) / (1 - a)
    return _scalar_out(np.where(inside, val, 0.0))


def omega0_dot(t, p: PulseParams):
    x = np.asarray(t, dtype=float) - p.t0
    inside = np.abs(x) <= p.T / 2
    val = p.omega_max / (1 - p.a) * np.exp(-(x**4) / p.width**4) * (-4 * x**3 / p.width**4)
    return _scalar_out(np.where(inside, val, 0.0))


def delta_t(t, p: PulseParams):
    """Chirp ``delta0 * sin(pi (t - t0) / T)`` on the closed support."""
    x = np.asarray(t, dtype=float) - p.t0
    inside = np.abs(x) <= p.T / 2
    return _scalar_out(np.where(inside, p.delta0 * np.sin(np.pi * x / p.T), 0.0))


def delta_dot(t, p: PulseParams):
    x = np.asarray(t, dtype=float) - p.t0
    inside = np.abs(x) <= p.T / 2
    val = p.delta0 * (np.pi / p.T) * np.cos(np.pi * x / p.T)
    return _scalar_out(np.where(inside, val, 0.0))


def _cd_ratio(om, om_dot, de, de_dot, blockade: bool):
    num = om_dot * de - om * de_dot
    den = (2.0 if blockade else 1.0) * om**2 + de**2
    num, den, moving = np.broadcast_arrays(
        np.asarray(num, float), np.asarray(den, float), (np.asarray(om_dot) != 0) | (np.asarray(de_dot) != 0)
    )
    degenerate = den == 0
    # outside the support everything is zero by definition; only a live profile is flagged
    if np.any(degenerate & moving):
        warnings.warn(
            "counterdiabatic drive requested where amplitude and detuning both vanish; returning 0",
            DegeneratePointWarning,
            stacklevel=3,
        )
    out = np.divide(num, den, out=np.zeros_like(num), where=~degenerate)
    return _scalar_out(out)


def cd_term(t, p: PulseParams):
    """Counterdiabatic drive ``(Omega0' delta - Omega0 delta') / (Omega0**2 + delta**2)``."""
    return _cd_ratio(omega0(t, p), omega0_dot(t, p), delta_t(t, p), delta_dot(t, p), False)


def cd_term_blockade(t, p: PulseParams):
    """CD drive matched to the sqrt(2)-enhanced blockaded coupling.

    Same numerator as :func:`cd_term` with denominator ``2 Omega0**2 + delta**2``.
    Provided for analysis only; the gate protocols drive with :func:`cd_term`.
    """
    return _cd_ratio(omega0(t, p), omega0_dot(t, p), delta_t(t, p), delta_dot(t, p), True)


def mixing_angle(t, p: PulseParams):
    """theta with tan(2 theta) = Omega0 / delta, taken continuous through delta = 0."""
    return _scalar_out(0.5 * np.arctan2(omega0(t, p), delta_t(t, p)))


# ---------------------------------------------------------------------------
# double sequence on [-T, T]


def _sequence_parts(t, p: PulseParams):
    """(Omega0, Omega0', delta, delta') of the double sequence, second pulse signed.

    The support of each pulse is open here so that all drive quantities are
    exactly zero at ``-T``, ``0`` and ``T``.
    """
    t = np.asarray(t, dtype=float)
    first = (t > -p.T) & (t < 0)
    second = (t > 0) & (t < p.T)
    p1 = PulseParams(p.omega_max, p.delta0, p.T, -p.T / 2, p.width)
    p2 = PulseParams(p.omega_max, p.delta0, p.T, p.T / 2, p.width)
    sign = np.where(second, float(p.second_pulse_sign), 1.0)
    om = np.where(first, omega0(t, p1), np.where(second, omega0(t, p2), 0.0)) * sign
    omd = np.where(first, omega0_dot(t, p1), np.where(second, omega0_dot(t, p2), 0.0)) * sign
    de = np.where(first, delta_t(t, p1), np.where(second, delta_t(t, p2), 0.0))
    ded = np.where(first, delta_dot(t, p1), np.where(second, delta_dot(t, p2), 0.0))
    return om, omd, de, ded


def sequence_omega0(t, p: PulseParams):
    return _scalar_out(_sequence_parts(t, p)[0])


def sequence_delta(t, p: PulseParams):
    return _scalar_out(_sequence_parts(t, p)[2])


def sequence_cd(t, p: PulseParams):
    om, omd, de, ded = _sequence_parts(t, p)
    return _cd_ratio(om, omd, de, ded, False)


def complex_rabi(t, p: PulseParams):
    """``Omega0 + i Omega_CD`` over the double sequence.

    The second pulse carries ``second_pulse_sign``; its CD drive is
    recomputed from the signed amplitude (which equals flipping it).
    """
    om, omd, de, ded = _sequence_parts(t, p)
    cd = np.asarray(_cd_ratio(om, omd, de, ded, False))
    out = om + 1j * cd
    return complex(out) if np.ndim(out) == 0 else out


def _sequence_sign(t, p: PulseParams):
    t = np.asarray(t, dtype=float)
    return np.where(t > 0, float(p.second_pulse_sign), 1.0)


def two_photon_step_rabi(t, tp: TwoPhotonPulseParams):
    """Identical step Rabi frequencies ``Omega1 = Omega2 = sqrt(-2 Delta (Omega0 + i Omega_CD))``.

    The root is the principal one of the sign-normalised drive, so it is
    continuous within each pulse even when the second pulse is inverted.
    """
    p = tp.base
    w = np.asarray(complex_rabi(t, p))
    sigma = _sequence_sign(t, p)
    kappa = -2.0 * tp.Delta * tp.effective_sign * sigma
    root = np.where(kappa > 0, np.sqrt(np.abs(kappa)), 1j * np.sqrt(np.abs(kappa)))
    out = root * np.sqrt(sigma * w)
    return complex(out) if np.ndim(out) == 0 else out


def three_photon_first_step(t, tp: ThreePhotonPulseParams):
    """First-step drive ``(Omega2 / Omega3)(Omega0 + i Omega_CD)``."""
    out = (tp.omega2 / tp.omega3) * np.asarray(complex_rabi(t, tp.base))
    return complex(out) if np.ndim(out) == 0 else out


def phase_jump_profile(t, pj: PhaseJumpParams):
    t = np.asarray(t, dtype=float)
    t_end = 2 * pj.half_time
    phase = np.where(t >= pj.half_time, pj.delta_psi, 0.0)
    inside = (t >= 0) & (t <= t_end)
    out = np.where(inside, pj.omega1_amp * np.exp(1j * phase), 0.0)
    return complex(out) if np.ndim(out) == 0 else out


def enforce_continuity(values):
    """Flip signs of a sampled square-root drive so consecutive samples do not jump.

    A sample is negated when its negation lies closer to the previous sample.
    """
    v = np.array(values, dtype=complex)
    for k in range(1, len(v)):
        if abs(v[k] + v[k - 1]) < abs(v[k] - v[k - 1]):
            v[k] = -v[k]
    return v


# ---------------------------------------------------------------------------
# drives: per-scheme coupling values used by the Hamiltonian assembly


def _fast_parts(t: float, p: PulseParams, t0: float, sign: float):
    x = t - t0
    e = math.exp(-(x**4) / p.width**4)
    a = p.a
    om = sign * p.omega_max * (e - a) / (1 - a)
    omd = sign * p.omega_max / (1 - a) * e * (-4 * x**3 / p.width**4)
    s, c = math.sin(math.pi * x / p.T), math.cos(math.pi * x / p.T)
    return om, omd, p.delta0 * s, p.delta0 * math.pi / p.T * c


def _fast_sequence(t: float, p: PulseParams):
    """Scalar (complex Rabi, delta, sign) of the double sequence; hot path of the integrator."""
    if -p.T < t < 0:
        om, omd, de, ded = _fast_parts(t, p, -p.T / 2, 1.0)
        sign = 1.0
    elif 0 < t < p.T:
        sign = float(p.second_pulse_sign)
        om, omd, de, ded = _fast_parts(t, p, p.T / 2, sign)
    else:
        return 0j, 0.0, 1.0
    den = om * om + de * de
    cd = (omd * de - om * ded) / den if den else 0.0
    return complex(om, cd), de, sign


@dataclass(frozen=True)
class SinglePhotonDrive:
    pulse: PulseParams
    scheme_kind: str = field(default="single_photon", init=False)

    @property
    def span(self):
        return self.pulse.span

    def values(self, t: float) -> dict:
        w, de, _ = _fast_sequence(t, self.pulse)
        return {"omega": w, "delta": de}


@dataclass(frozen=True)
class TwoPhotonDrive:
    params: TwoPhotonPulseParams
    scheme_kind: str = field(default="two_photon", init=False)

    @property
    def span(self):
        return self.params.base.span

    def values(self, t: float) -> dict:
        w, de, sigma = _fast_sequence(t, self.params.base)
        kappa = -2.0 * self.params.Delta * self.params.effective_sign * sigma
        root = math.sqrt(kappa) if kappa > 0 else 1j * math.sqrt(-kappa)
        om = root * cmath.sqrt(sigma * w)
        return {"omega1": om, "omega2": om, "Delta": self.params.Delta, "delta": de}


@dataclass(frozen=True)
class ThreePhotonDrive:
    params: ThreePhotonPulseParams
    scheme_kind: str = field(default="three_photon", init=False)

    @property
    def span(self):
        return self.params.base.span

    def values(self, t: float) -> dict:
        w, de, _ = _fast_sequence(t, self.params.base)
        tp = self.params
        return {"omega1": tp.omega2 / tp.omega3 * w, "omega2": tp.omega2, "omega3": tp.omega3, "delta": de}


@dataclass(frozen=True)
class PhaseJumpDrive:
    params: PhaseJumpParams
    scheme_kind: str = field(default="three_photon", init=False)

    @property
    def span(self):
        return self.params.span

    def values(self, t: float) -> dict:
        pj = self.params
        if 0 <= t <= 2 * pj.half_time:
            om = pj.omega1_amp * (cmath.exp(1j * pj.delta_psi) if t >= pj.half_time else 1.0)
        else:
            om = 0j
        return {"omega1": om, "omega2": pj.omega2, "omega3": pj.omega3, "delta": pj.delta}


# ---------------------------------------------------------------------------
# export


def sample_sequence(p: PulseParams, points_per_pulse: int = 2000) -> dict[str, np.ndarray]:
    """Sample Omega0, Omega_CD and delta of the double sequence on [-T, T]."""
    if points_per_pulse < 2:
        raise ValueError("need at least 2 points per pulse")
    t = np.linspace(-p.T, p.T, 2 * points_per_pulse - 1)
    w = complex_rabi(t, p)
    return {"t_us": t, "omega0": w.real, "omega_cd": w.imag, "delta": sequence_delta(t, p)}


def export_profiles(samples: dict[str, np.ndarray], out_dir, fmt: str = "csv") -> list[Path]:
    """Write each sampled curve as ``<name>.csv`` (t_us, value) or ``<name>.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t = samples["t_us"]
    written = []
    for name, values in samples.items():
        if name == "t_us":
            continue
        if fmt == "csv":
            path = out_dir / f"{name}.csv"
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t_us", "value"])
                for ti, vi in zip(t, values):
                    writer.writerow([repr(float(ti)), repr(float(vi))])
        elif fmt == "json":
            path = out_dir / f"{name}.json"
            path.write_text(json.dumps({"t_us": t.tolist(), "value": np.asarray(values).tolist()}))
        else:
            raise ValueError(f"unknown format {fmt!r}")
        written.append(path)
    return written
