"""Pure-state and Lindblad propagation.

The equations of motion use the sign convention

    d psi / dt = s * i * H psi,      d rho / dt = s * i [H, rho] + D[rho]

with ``s = +1`` by default.  ``s = -1`` is the textbook Schroedinger sign.
The default is the one under which the counterdiabatic drive
``Omega0 + i Omega_CD`` with ``H[r, 1] = Omega / 2`` suppresses
nonadiabatic transitions.

Integration is adaptive explicit Runge-Kutta (DOP853, order 8 with embedded
error estimate) through :func:`scipy.integrate.solve_ivp`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


class PropagationError(RuntimeError):
    pass


class PhaseUndefinedError(ValueError):
    pass


@dataclass
class QuantumState:
    """A pure state vector or a density matrix over labelled basis states."""

    data: np.ndarray
    labels: list
    time: float = 0.0

    @property
    def kind(self) -> str:
        return "density" if self.data.ndim == 2 and self.data.shape[0] == self.data.shape[1] else "pure"

    def check(self, norm_tol=1e-9, trace_tol=1e-8, herm_tol=1e-10, pos_tol=1e-8):
        if self.kind == "pure":
            norm = np.linalg.norm(self.data)
            if abs(norm - 1) > norm_tol:
                raise ValueError(f"state norm {norm} deviates from 1")
            return
        rho = self.data
        tr = np.trace(rho).real
        if abs(tr - 1) > trace_tol:
            raise ValueError(f"trace {tr} deviates from 1")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > herm_tol:
            raise ValueError(f"density matrix not Hermitian ({herm:.2e})")
        lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
        if lam < -pos_tol:
            raise ValueError(f"density matrix has negative eigenvalue {lam:.2e}")


@dataclass
class Trajectory:
    """Observables sampled on a uniform grid plus the final state.

    ``states`` holds snapshots (pure: shape (n_t, n) or (n_t, n, k); density:
    (n_t, n, n)) when they were kept, otherwise None.  ``populations`` has
    shape (n_t, n) for single states and (n_t, n, k) for batched pure runs.
    """

    times: np.ndarray
    populations: np.ndarray
    final_state: np.ndarray
    labels: list
    kind: str
    states: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def population(self, label: str) -> np.ndarray:
        return self.populations[:, self.labels.index(label)]


def _sample_grid(t_span, n_samples):
    return np.linspace(t_span[0], t_span[1], n_samples)


def _check_solution(sol, what):
    if sol.status != 0:
        raise PropagationError(f"{what} integration failed: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise PropagationError(f"{what} integration produced non-finite values")


def propagate_schrodinger(
    H,
    psi0,
    t_span,
    rtol=DEFAULT_RTOL,
    atol=DEFAULT_ATOL,
    n_samples=4001,
    sign=1,
    labels=None,
    keep_states=True,
) -> Trajectory:
    """Integrate ``d psi/dt = sign * i H(t) psi``.

    ``psi0`` may be a vector or an (n, k) matrix of k states propagated
    together.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    shape = psi0.shape
    n = shape[0]
    norms0 = np.linalg.norm(psi0, axis=0)
    if np.any(np.abs(norms0 - 1) > 1e-9):
        raise ValueError("initial state(s) not normalised")
    fac = 1j * sign

    def rhs(t, y):
        out = (fac * (H(t) @ y.reshape(shape))).ravel()
        if not np.isfinite(out).all():
            raise PropagationError(f"non-finite derivative at t = {t}")
        return out

    times = _sample_grid(t_span, n_samples)
    sol = solve_ivp(rhs, t_span, psi0.ravel(), method="DOP853", rtol=rtol, atol=atol, t_eval=times)
    _check_solution(sol, "Schroedinger")
    states = sol.y.T.reshape((len(times),) + shape)
    final = states[-1]
    drift = np.max(np.abs(np.linalg.norm(final, axis=0) - 1))
    if drift > 1e-6:
        raise PropagationError(f"norm drift {drift:.2e} exceeds 1e-6")
    labels = list(labels) if labels is not None else [str(i) for i in range(n)]
    return Trajectory(
        times=times,
        populations=np.abs(states) ** 2,
        final_state=final,
        labels=labels,
        kind="pure",
        states=states if keep_states else None,
        meta={"nfev": sol.nfev, "rtol": rtol, "atol": atol, "sign": sign, "norm_drift": float(drift)},
    )


def _jump_superoperator(L_ops, n):
    # row-major vec: vec(L rho L^dag) = kron(L, conj(L)) vec(rho)
    J = sp.csr_matrix((n * n, n * n), dtype=complex)
    for L in L_ops:
        Ls = sp.csr_matrix(L)
        J = J + sp.kron(Ls, Ls.conj(), format="csr")
    return J


def propagate_lindblad(
    H,
    L_ops,
    rho0,
    t_span,
    rtol=DEFAULT_RTOL,
    atol=DEFAULT_ATOL,
    n_samples=4001,
    sign=1,
    labels=None,
    keep_states=False,
    trace_tol=1e-6,
) -> Trajectory:
    """Integrate ``d rho/dt = sign * i [H, rho] + sum_L (L rho L^+ - {L^+ L, rho} / 2)``."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim == 1:
        rho0 = np.outer(rho0, rho0.conj())
    n = rho0.shape[0]
    if abs(np.trace(rho0).real - 1) > 1e-8:
        raise ValueError("initial density matrix does not have unit trace")
    L_ops = [np.asarray(L, dtype=complex) for L in L_ops]
    gamma = sum((L.conj().T @ L for L in L_ops), np.zeros((n, n), dtype=complex))
    J = _jump_superoperator(L_ops, n) if L_ops else None
    fac = 1j * sign

    def rhs(t, y):
        rho = y.reshape(n, n)
        K = fac * H(t) - 0.5 * gamma
        out = K @ rho
        out += out.conj().T
        out = out.ravel()
        if J is not None:
            out += J @ y
        if not np.isfinite(out).all():
            raise PropagationError(f"non-finite derivative at t = {t}")
        return out

    times = _sample_grid(t_span, n_samples)
    sol = solve_ivp(rhs, t_span, rho0.ravel(), method="DOP853", rtol=rtol, atol=atol, t_eval=times)
    _check_solution(sol, "Lindblad")
    rhos = sol.y.T.reshape(len(times), n, n)
    traces = np.einsum("kii->k", rhos).real
    drift = float(np.max(np.abs(traces - np.trace(rho0).real)))
    if drift > trace_tol:
        raise PropagationError(f"trace drift {drift:.2e} exceeds {trace_tol:.0e}")
    labels = list(labels) if labels is not None else [str(i) for i in range(n)]
    return Trajectory(
        times=times,
        populations=np.einsum("kii->ki", rhos).real,
        final_state=rhos[-1],
        labels=labels,
        kind="density",
        states=rhos if keep_states else None,
        meta={"nfev": sol.nfev, "rtol": rtol, "atol": atol, "sign": sign, "trace_drift": drift},
    )


def _label_vector(labels, label):
    """Basis vector for ``label``; ``"a+b"`` gives the normalised symmetric combination."""
    parts = label.split("+")
    v = np.zeros(len(labels), dtype=complex)
    for part in parts:
        try:
            v[labels.index(part)] = 1.0
        except ValueError:
            raise KeyError(f"unknown basis label {part!r}") from None
    return v / np.sqrt(len(parts))


def population(state: QuantumState, label: str) -> float:
    v = _label_vector(state.labels, label)
    if state.kind == "pure":
        return float(abs(np.vdot(v, state.data)) ** 2)
    val = np.vdot(v, state.data @ v)
    return float(val.real)


def coherence(state: QuantumState, label_a: str, label_b: str) -> complex:
    """``<a|rho|b>`` (for a pure state ``<a|psi><psi|b>``)."""
    va = _label_vector(state.labels, label_a)
    vb = _label_vector(state.labels, label_b)
    if state.kind == "pure":
        return complex(np.vdot(va, state.data) * np.conj(np.vdot(vb, state.data)))
    return complex(np.vdot(va, state.data @ vb))


@dataclass(frozen=True)
class AccumulatedPhase:
    value: float
    min_amplitude: float

    @property
    def reliable(self) -> bool:
        """False when the amplitude came within 1e-3 of zero, where unwrapping is a guess."""
        return self.min_amplitude >= 1e-3

    def __float__(self):
        return self.value


def accumulated_phase(traj: Trajectory, label: str, column: int | None = None) -> AccumulatedPhase:
    """Unwrapped phase gained by the ``label`` amplitude along a pure trajectory."""
    if traj.kind != "pure" or traj.states is None:
        raise ValueError("accumulated_phase needs a pure trajectory with stored states")
    states = traj.states if column is None else traj.states[..., column]
    if states.ndim != 2:
        raise ValueError("batched trajectory: pass column=")
    amp = states[:, traj.labels.index(label)]
    mag = np.abs(amp)
    if mag[0] < 1e-6 or mag[-1] < 1e-6:
        raise PhaseUndefinedError(f"amplitude of {label!r} vanishes at an endpoint; phase undefined")
    phase = np.unwrap(np.angle(amp))
    return AccumulatedPhase(float(phase[-1] - phase[0]), float(mag.min()))
