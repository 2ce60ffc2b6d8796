"""Level schemes, two-atom Hamiltonians and decay operators.

Per-atom basis order is fixed as ``[0, 1, d, p, s, r]`` restricted to the
levels a scheme uses.  Two-atom states are ordered row-major as
``control (x) target`` and labelled by concatenating the single-atom
labels, e.g. ``"1r"``.  With an infinite blockade the ``"rr"`` state is
deleted from the basis.

Hamiltonians are written in the rotating frame with hbar = 1:

    H = sum_k (Omega_k / 2) |upper_k><lower_k| + h.c. + sum_j Delta_j |j><j|
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INFINITE = math.inf

LADDERS = {
    "single_photon": ("0", "1", "d", "r"),
    "two_photon": ("0", "1", "d", "p", "r"),
    "three_photon": ("0", "1", "d", "p", "s", "r"),
}

# (upper, lower, drive key) for the Omega/2 |upper><lower| + h.c. couplings
COUPLINGS = {
    "single_photon": (("r", "1", "omega"),),
    "two_photon": (("p", "1", "omega1"), ("r", "p", "omega2")),
    "three_photon": (("p", "1", "omega1"), ("s", "p", "omega2"), ("r", "s", "omega3")),
}

# (level, drive key) for diagonal energies
DETUNINGS = {
    "single_photon": (("r", "delta"),),
    "two_photon": (("p", "Delta"), ("r", "delta")),
    "three_photon": (("r", "delta"),),
}


@dataclass(frozen=True)
class DecayChannel:
    """Spontaneous decay out of ``from_level`` at rate ``gamma`` (1/us).

    ``branches`` maps each lower level to its branching ratio.
    """

    from_level: str
    gamma: float
    branches: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"decay rate must be non-negative, got {self.gamma}")
        total = sum(self.branches.values())
        if self.branches and abs(total - 1.0) > 1e-12:
            raise ValueError(f"branching ratios out of {self.from_level!r} sum to {total}, not 1")
        if any(b < 0 for b in self.branches.values()):
            raise ValueError("branching ratios must be non-negative")

    @classmethod
    def from_lifetime(cls, from_level: str, lifetime: float, branches: dict):
        return cls(from_level, 1.0 / lifetime, dict(branches))


@dataclass(frozen=True)
class AtomSpecies:
    """Rydberg-state decay preset."""

    name: str
    gamma_r: float
    branches: dict

    def channels(self) -> list[DecayChannel]:
        return [DecayChannel("r", self.gamma_r, dict(self.branches))]


SPECIES = {
    "Cs107p": AtomSpecies("Cs107p", 1 / 540, {"0": 1 / 16, "1": 1 / 16, "d": 7 / 8}),
    "Rb113p": AtomSpecies("Rb113p", 1 / 540, {"0": 1 / 8, "1": 1 / 8, "d": 3 / 4}),
}


@dataclass(frozen=True)
class LevelScheme:
    kind: str
    decay: tuple = ()

    def __post_init__(self):
        if self.kind not in LADDERS:
            raise ValueError(f"unknown scheme {self.kind!r}; expected one of {sorted(LADDERS)}")
        object.__setattr__(self, "decay", tuple(self.decay))
        order = {lab: i for i, lab in enumerate(self.levels)}
        for ch in self.decay:
            if ch.from_level not in order:
                raise ValueError(f"decay from unknown level {ch.from_level!r} in {self.kind} scheme")
            for lower in ch.branches:
                if lower not in order:
                    raise ValueError(f"decay into unknown level {lower!r}")
                if order[lower] >= order[ch.from_level]:
                    raise ValueError(f"decay {ch.from_level}->{lower} does not go down the ladder")

    @property
    def levels(self) -> tuple[str, ...]:
        return LADDERS[self.kind]

    @property
    def n(self) -> int:
        return len(self.levels)

    def index(self, label: str) -> int:
        return self.levels.index(label)

    def projector(self, upper: str, lower: str) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[self.index(upper), self.index(lower)] = 1.0
        return m

    @property
    def has_decay(self) -> bool:
        return any(ch.gamma > 0 for ch in self.decay)


def _check_drive(scheme: LevelScheme, drive):
    if drive.scheme_kind != scheme.kind:
        raise ValueError(f"{type(drive).__name__} drives a {drive.scheme_kind} scheme, not {scheme.kind}")


def single_atom_hamiltonian(scheme: LevelScheme, drive, t: float) -> np.ndarray:
    _check_drive(scheme, drive)
    vals = drive.values(t)
    h = np.zeros((scheme.n, scheme.n), dtype=complex)
    for upper, lower, key in COUPLINGS[scheme.kind]:
        i, j = scheme.index(upper), scheme.index(lower)
        h[i, j] += vals[key] / 2
        h[j, i] += np.conj(vals[key]) / 2
    for level, key in DETUNINGS[scheme.kind]:
        h[scheme.index(level), scheme.index(level)] += np.real(vals[key])
    return h


class TimeDependentHamiltonian:
    """``H(t) = H_static + sum_k [c_k(t) A_k + conj(c_k(t)) A_k^T] + sum_j e_j(t) D_j``.

    Callable returning the dense matrix at time ``t``.
    """

    def __init__(self, static, couplings, diagonals, drive):
        self.static = static
        self.couplings = couplings  # list of (key, A)
        self.diagonals = diagonals  # list of (key, D)
        self.drive = drive

    def __call__(self, t: float) -> np.ndarray:
        vals = self.drive.values(t)
        h = self.static.copy()
        for key, a in self.couplings:
            c = vals[key]
            if c:
                h += c * a
                h += np.conj(c) * a.T
        for key, d in self.diagonals:
            e = np.real(vals[key])
            if e:
                h += e * d
        return h


class TwoAtomSystem:
    """Two identically driven atoms with blockade shift ``B`` on ``|rr>``.

    ``blockade_B = INFINITE`` removes ``|rr>`` from the basis instead.
    """

    def __init__(self, scheme: LevelScheme, blockade_B: float = INFINITE):
        if not (blockade_B == INFINITE or np.isfinite(blockade_B)):
            raise ValueError(f"invalid blockade strength {blockade_B}")
        self.scheme = scheme
        self.blockade_B = blockade_B
        levels = scheme.levels
        pairs = [(a, b) for a in levels for b in levels]
        full_labels = [a + b for a, b in pairs]
        self.keep = np.array([i for i, lab in enumerate(full_labels) if not (self.infinite and lab == "rr")])
        self.labels = [full_labels[i] for i in self.keep]
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def infinite(self) -> bool:
        return self.blockade_B == INFINITE

    @property
    def dimension(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown basis label {label!r}") from None

    def restrict(self, full_op: np.ndarray) -> np.ndarray:
        return full_op[np.ix_(self.keep, self.keep)]

    def embed(self, op: np.ndarray, atom: str | None = None) -> np.ndarray:
        """Single-atom operator on ``"control"``, ``"target"`` or both (``None``, summed)."""
        eye = np.eye(self.scheme.n)
        if atom == "control":
            full = np.kron(op, eye)
        elif atom == "target":
            full = np.kron(eye, op)
        elif atom is None:
            full = np.kron(op, eye) + np.kron(eye, op)
        else:
            raise ValueError(f"atom must be 'control', 'target' or None, got {atom!r}")
        return self.restrict(full)

    def hamiltonian(self, drive) -> TimeDependentHamiltonian:
        _check_drive(self.scheme, drive)
        sc = self.scheme
        static = np.zeros((self.dimension, self.dimension), dtype=complex)
        if not self.infinite:
            k = self.index("rr")
            static[k, k] = self.blockade_B
        couplings = [
            (key, self.embed(sc.projector(upper, lower)) / 2) for upper, lower, key in COUPLINGS[sc.kind]
        ]
        diagonals = [(key, self.embed(sc.projector(level, level))) for level, key in DETUNINGS[sc.kind]]
        return TimeDependentHamiltonian(static, couplings, diagonals, drive)

    def basis_state(self, label: str) -> np.ndarray:
        psi = np.zeros(self.dimension, dtype=complex)
        psi[self.index(label)] = 1.0
        return psi

    def swap_operator(self) -> np.ndarray:
        n = self.scheme.n
        full = np.zeros((n * n, n * n))
        for a in range(n):
            for b in range(n):
                full[b * n + a, a * n + b] = 1.0
        return self.restrict(full)


def two_atom_hamiltonian(system: TwoAtomSystem, drive, t: float) -> np.ndarray:
    return system.hamiltonian(drive)(t)


def lindblad_operators(system: TwoAtomSystem) -> list[np.ndarray]:
    """Jump operators ``sqrt(b_jk gamma_k) |j><k|`` on each atom, projected on the kept basis."""
    sc = system.scheme
    ops = []
    for atom in ("control", "target"):
        for ch in sc.decay:
            for lower, b in ch.branches.items():
                rate = b * ch.gamma
                if rate > 0:
                    ops.append(math.sqrt(rate) * system.embed(sc.projector(lower, ch.from_level), atom))
    return ops


def effective_blockaded_two_level(drive, t: float) -> np.ndarray:
    """Perfect-blockade reduction on ``{|11>, (|1r> + |r1>)/sqrt(2)}``."""
    if drive.scheme_kind != "single_photon":
        raise ValueError("the blockaded two-level reduction needs a single-photon drive")
    vals = drive.values(t)
    c = math.sqrt(2) * vals["omega"] / 2
    return np.array([[0, np.conj(c)], [c, vals["delta"]]], dtype=complex)
