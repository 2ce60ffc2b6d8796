import itertools
import math

import numpy as np
import pytest
from conftest import ConstantDrive
from hypothesis import given, settings
from hypothesis import strategies as st

from rydberg_cd.dynamics import propagate_schrodinger
from rydberg_cd.model import (
    INFINITE,
    SPECIES,
    DecayChannel,
    LevelScheme,
    TwoAtomSystem,
    effective_blockaded_two_level,
    lindblad_operators,
    single_atom_hamiltonian,
    two_atom_hamiltonian,
)
from rydberg_cd.pulsegen import (
    PulseParams,
    SinglePhotonDrive,
    ThreePhotonDrive,
    ThreePhotonPulseParams,
    TwoPhotonDrive,
    TwoPhotonPulseParams,
    complex_rabi,
    sequence_delta,
    three_photon_first_step,
    two_photon_step_rabi,
)
from rydberg_cd.units import ghz, mhz

FIG2 = PulseParams(mhz(20), mhz(10), 0.05)
FIG2_FLIP = PulseParams(mhz(20), mhz(10), 0.05, second_pulse_sign=-1)


def _drives():
    two = TwoPhotonPulseParams(FIG2_FLIP, Delta=ghz(-4))
    three = ThreePhotonPulseParams(PulseParams(mhz(10), mhz(5), 0.1), omega2=ghz(10), omega3=mhz(300))
    return {
        "single_photon": SinglePhotonDrive(FIG2),
        "two_photon": TwoPhotonDrive(two),
        "three_photon": ThreePhotonDrive(three),
    }


DRIVES = _drives()
KINDS = sorted(DRIVES)
times = st.floats(-0.1, 0.1)


class TestDriveValues:
    """The fast scalar drive path must agree with the vectorised profiles."""

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-0.05, 0.05), st.sampled_from([FIG2, FIG2_FLIP]))
    def test_single_photon(self, t, p):
        v = SinglePhotonDrive(p).values(t)
        assert v["omega"] == pytest.approx(complex_rabi(t, p), rel=1e-12, abs=1e-9)
        assert v["delta"] == pytest.approx(sequence_delta(t, p), rel=1e-12, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-0.05, 0.05))
    def test_two_photon(self, t):
        drive = DRIVES["two_photon"]
        expected = two_photon_step_rabi(t, drive.params)
        v = drive.values(t)
        assert v["omega1"] == v["omega2"]
        assert v["omega1"] == pytest.approx(expected, rel=1e-12, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-0.1, 0.1))
    def test_three_photon(self, t):
        drive = DRIVES["three_photon"]
        assert drive.values(t)["omega1"] == pytest.approx(three_photon_first_step(t, drive.params), rel=1e-12, abs=1e-9)


class TestSingleAtom:
    @pytest.mark.parametrize("kind", KINDS)
    @settings(max_examples=25, deadline=None)
    @given(t=times)
    def test_hermitian(self, kind, t):
        h = single_atom_hamiltonian(LevelScheme(kind), DRIVES[kind], t)
        assert np.max(np.abs(h - h.conj().T)) < 1e-14

    @pytest.mark.parametrize("kind", KINDS)
    @settings(max_examples=25, deadline=None)
    @given(t=times)
    def test_uncoupled_levels(self, kind, t):
        sc = LevelScheme(kind)
        h = single_atom_hamiltonian(sc, DRIVES[kind], t)
        for lab in ("0", "d"):
            i = sc.index(lab)
            assert not h[i].any() and not h[:, i].any()

    def test_zero_at_sequence_edges(self):
        sc = LevelScheme("single_photon")
        for t in (-FIG2.T, 0.0, FIG2.T):
            assert not single_atom_hamiltonian(sc, DRIVES["single_photon"], t).any()

    def test_coupling_layout(self):
        sc = LevelScheme("single_photon")
        drive = ConstantDrive("single_photon", {"omega": 2.0 + 4.0j, "delta": 3.0})
        h = single_atom_hamiltonian(sc, drive, 0.0)
        assert h[sc.index("r"), sc.index("1")] == 1.0 + 2.0j
        assert h[sc.index("1"), sc.index("r")] == 1.0 - 2.0j
        assert h[sc.index("r"), sc.index("r")] == 3.0

    def test_two_photon_intermediate_detuning(self):
        sc = LevelScheme("two_photon")
        h = single_atom_hamiltonian(sc, DRIVES["two_photon"], -0.01)
        assert h[sc.index("p"), sc.index("p")].real / (2 * math.pi) == pytest.approx(-4000.0, rel=1e-15)

    def test_three_photon_ladder(self):
        sc = LevelScheme("three_photon")
        h = single_atom_hamiltonian(sc, DRIVES["three_photon"], -0.05)
        assert h[sc.index("s"), sc.index("p")] == pytest.approx(ghz(10) / 2)
        assert h[sc.index("r"), sc.index("s")] == pytest.approx(mhz(300) / 2)
        assert h[sc.index("p"), sc.index("1")].real == pytest.approx(ghz(10) / mhz(300) * mhz(10) / 2)

    def test_scheme_mismatch(self):
        with pytest.raises(ValueError, match="scheme"):
            single_atom_hamiltonian(LevelScheme("two_photon"), DRIVES["single_photon"], 0.0)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            LevelScheme("four_photon")


class TestTwoAtom:
    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("B", [0.0, ghz(1), INFINITE])
    def test_hermitian_and_swap_symmetric(self, kind, B):
        system = TwoAtomSystem(LevelScheme(kind), B)
        H = system.hamiltonian(DRIVES[kind])
        S = system.swap_operator()
        for t in np.linspace(-0.1, 0.1, 17):
            h = H(t)
            assert np.max(np.abs(h - h.conj().T)) < 1e-14
            assert np.max(np.abs(h @ S - S @ h)) < 1e-12

    @pytest.mark.parametrize("kind", KINDS)
    def test_minkowski_spectrum(self, kind):
        sc = LevelScheme(kind)
        system = TwoAtomSystem(sc, 0.0)
        t = -0.013
        e1 = np.linalg.eigvalsh(single_atom_hamiltonian(sc, DRIVES[kind], t))
        expected = np.sort([a + b for a, b in itertools.product(e1, e1)])
        got = np.linalg.eigvalsh(two_atom_hamiltonian(system, DRIVES[kind], t))
        scale = max(1.0, np.abs(e1).max())
        np.testing.assert_allclose(got, expected, atol=1e-12 * scale)

    def test_rr_diagonal(self):
        B = ghz(3)
        system = TwoAtomSystem(LevelScheme("single_photon"), B)
        drive = DRIVES["single_photon"]
        for t in (-0.04, -0.01, 0.02):
            h = two_atom_hamiltonian(system, drive, t)
            k = system.index("rr")
            assert h[k, k].real == pytest.approx(B + 2 * drive.values(t)["delta"], rel=1e-15)

    def test_infinite_blockade_drops_rr(self):
        system = TwoAtomSystem(LevelScheme("single_photon"), INFINITE)
        assert "rr" not in system.labels
        assert system.dimension == 15
        with pytest.raises(KeyError):
            system.index("rr")

    def test_sqrt2_enhanced_coupling(self):
        system = TwoAtomSystem(LevelScheme("single_photon"), INFINITE)
        drive = ConstantDrive("single_photon", {"omega": 3.0 + 1.0j, "delta": 0.0})
        h = two_atom_hamiltonian(system, drive, 0.0)
        bright = (system.basis_state("1r") + system.basis_state("r1")) / math.sqrt(2)
        c = np.vdot(bright, h @ system.basis_state("11"))
        assert c == pytest.approx(math.sqrt(2) * (3.0 + 1.0j) / 2, rel=1e-15)

    def test_invalid_blockade(self):
        with pytest.raises(ValueError):
            TwoAtomSystem(LevelScheme("single_photon"), float("nan"))


class TestEffectiveTwoLevel:
    def test_zero_drive(self):
        h = effective_blockaded_two_level(ConstantDrive("single_photon", {"omega": 0.0, "delta": 2.5}), 0.0)
        np.testing.assert_array_equal(h, np.diag([0.0, 2.5]))

    def test_at_first_peak(self):
        h = effective_blockaded_two_level(DRIVES["single_photon"], -FIG2.T / 2)
        assert h[1, 0] == pytest.approx(math.sqrt(2) / 2 * complex_rabi(-FIG2.T / 2, FIG2), rel=1e-12)
        assert h[0, 1] == np.conj(h[1, 0])

    @pytest.mark.slow
    def test_finite_blockade_limit(self):
        """Full two-atom propagation at B/2pi = 100 GHz against the blockaded two-level model."""
        drive = DRIVES["single_photon"]
        system = TwoAtomSystem(LevelScheme("single_photon"), ghz(100))
        full = propagate_schrodinger(system.hamiltonian(drive), system.basis_state("11"), FIG2.span, n_samples=2)
        eff = propagate_schrodinger(
            lambda t: effective_blockaded_two_level(drive, t), np.array([1.0, 0.0], complex), FIG2.span, n_samples=2
        )
        g, e = eff.final_state
        bright = (system.basis_state("1r") + system.basis_state("r1")) / math.sqrt(2)
        embedded = g * system.basis_state("11") + e * bright
        assert abs(np.vdot(embedded, full.final_state)) ** 2 > 1 - 1e-5


class TestDecay:
    def test_no_rates_no_operators(self):
        system = TwoAtomSystem(LevelScheme("single_photon", (DecayChannel("r", 0.0, {"0": 1.0}),)))
        assert lindblad_operators(system) == []
        assert lindblad_operators(TwoAtomSystem(LevelScheme("single_photon"))) == []

    def test_cs_preset(self):
        cs = SPECIES["Cs107p"]
        system = TwoAtomSystem(LevelScheme("single_photon", tuple(cs.channels())), ghz(4))
        ops = lindblad_operators(system)
        assert len(ops) == 6
        sc = system.scheme
        # r -> d on the control atom, acting on |r0>
        L = next(op for op in ops if abs(op[system.index("d0"), system.index("r0")]) > 0)
        assert abs(L[system.index("d0"), system.index("r0")]) ** 2 == pytest.approx((7 / 8) / 540, rel=1e-14)
        assert sc.decay[0].gamma == pytest.approx(1 / 540, rel=1e-15)

    @pytest.mark.parametrize("name", sorted(SPECIES))
    def test_branching_closure(self, name):
        for ch in SPECIES[name].channels():
            assert abs(sum(ch.branches.values()) - 1) < 1e-12

    def test_cs_branches(self):
        ch = SPECIES["Cs107p"].channels()[0]
        assert ch.branches == {"0": 1 / 16, "1": 1 / 16, "d": 7 / 8}

    def test_bad_branching_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            DecayChannel("r", 1.0, {"0": 0.5, "1": 0.4})
        with pytest.raises(ValueError):
            DecayChannel("r", -1.0, {"0": 1.0})

    def test_decay_must_go_down(self):
        with pytest.raises(ValueError):
            LevelScheme("two_photon", (DecayChannel("p", 1.0, {"r": 1.0}),))

    def test_lifetime_constructor(self):
        ch = DecayChannel.from_lifetime("p", 0.155, {"0": 1 / 16, "1": 1 / 16, "d": 7 / 8})
        assert ch.gamma == pytest.approx(1 / 0.155)

    def test_infinite_blockade_projection(self):
        cs = SPECIES["Cs107p"]
        full = TwoAtomSystem(LevelScheme("single_photon", tuple(cs.channels())), 0.0)
        cut = TwoAtomSystem(LevelScheme("single_photon", tuple(cs.channels())), INFINITE)
        for a, b in zip(lindblad_operators(full), lindblad_operators(cut)):
            np.testing.assert_array_equal(b, a[np.ix_(cut.keep, cut.keep)])
