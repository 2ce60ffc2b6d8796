import math

import numpy as np
import pytest

from rydberg_cd.dynamics import (
    PhaseUndefinedError,
    PropagationError,
    QuantumState,
    accumulated_phase,
    coherence,
    population,
    propagate_lindblad,
    propagate_schrodinger,
)
from rydberg_cd.gate import ProtocolConfig, bell_input, prepare_bell
from rydberg_cd.model import SPECIES, LevelScheme, TwoAtomSystem, lindblad_operators, single_atom_hamiltonian
from rydberg_cd.pulsegen import PulseParams, SinglePhotonDrive
from rydberg_cd.units import ghz, mhz

FIG2 = PulseParams(mhz(20), mhz(10), 0.05)
SC = LevelScheme("single_photon")


def single_atom_run(pulse, label="1"):
    drive = SinglePhotonDrive(pulse)
    H = lambda t: single_atom_hamiltonian(SC, drive, t)
    psi0 = np.zeros(SC.n, complex)
    psi0[SC.index(label)] = 1
    return propagate_schrodinger(H, psi0, pulse.span, labels=list(SC.levels))


class TestSchrodinger:
    def test_zero_hamiltonian(self):
        psi0 = np.array([0.6, 0.8j])
        tr = propagate_schrodinger(lambda t: np.zeros((2, 2)), psi0, (0.0, 1.0), n_samples=11)
        np.testing.assert_array_equal(tr.states, np.tile(psi0, (11, 1)))

    @pytest.mark.parametrize("sign", [1, -1])
    def test_rabi_formula(self, sign):
        om = mhz(20)
        H = np.array([[0, om / 2], [om / 2, 0]], complex)
        tr = propagate_schrodinger(lambda t: H, np.array([1, 0], complex), (0.0, 0.1), n_samples=20, sign=sign)
        np.testing.assert_allclose(tr.populations[:, 1], np.sin(om * tr.times / 2) ** 2, atol=1e-8, rtol=0)

    def test_batched_columns_match_single_runs(self):
        om = mhz(20)
        H = np.array([[0.3, om / 2], [om / 2, -1.0]], complex)
        batch = propagate_schrodinger(lambda t: H, np.eye(2, dtype=complex), (0.0, 0.1), n_samples=3)
        for k in range(2):
            single = propagate_schrodinger(lambda t: H, np.eye(2, dtype=complex)[:, k], (0.0, 0.1), n_samples=3)
            np.testing.assert_allclose(batch.final_state[:, k], single.final_state, atol=1e-10)

    def test_norm_conserved(self):
        tr = single_atom_run(FIG2)
        assert np.max(np.abs(np.linalg.norm(tr.states, axis=1) - 1)) < 1e-8

    def test_rejects_unnormalised(self):
        with pytest.raises(ValueError):
            propagate_schrodinger(lambda t: np.zeros((2, 2)), np.array([1.0, 1.0]), (0, 1))

    def test_non_finite_aborts(self):
        with pytest.raises(PropagationError):
            propagate_schrodinger(lambda t: np.full((2, 2), np.nan), np.array([1.0, 0.0]), (0, 1))


class TestDoubleARP:
    def test_return_and_pi_phase(self):
        tr = single_atom_run(FIG2)
        assert tr.population("1")[-1] > 0.9999
        phi = accumulated_phase(tr, "1")
        assert abs(abs(phi.value) - math.pi) < 1e-2

    def test_dips_mid_sequence(self):
        tr = single_atom_run(FIG2)
        assert tr.population("1").min() < 1e-3

    def test_inverted_second_pulse_cancels_phase(self):
        flipped = PulseParams(mhz(20), mhz(10), 0.05, second_pulse_sign=-1)
        tr = single_atom_run(flipped)
        assert tr.population("1")[-1] > 0.9999
        phi = math.remainder(accumulated_phase(tr, "1").value, 2 * math.pi)
        assert abs(phi) < 1e-2

    def test_uncoupled_state_is_inert(self):
        tr = single_atom_run(FIG2, "0")
        np.testing.assert_array_equal(tr.final_state, np.eye(SC.n)[SC.index("0")])


class TestPhase:
    def test_static_detuning_ground_state(self):
        H = np.diag([0.0, 5.0]).astype(complex)
        tr = propagate_schrodinger(lambda t: H, np.array([1, 0], complex), (0, 2.0), labels=["g", "e"])
        assert accumulated_phase(tr, "g").value == 0.0

    def test_excited_phase_unwraps(self):
        H = np.diag([0.0, 5.0]).astype(complex)
        tr = propagate_schrodinger(lambda t: H, np.array([0, 1], complex), (0, 2.0), labels=["g", "e"])
        assert accumulated_phase(tr, "e").value == pytest.approx(10.0, abs=1e-8)

    def test_undefined_phase(self):
        H = np.diag([0.0, 5.0]).astype(complex)
        tr = propagate_schrodinger(lambda t: H, np.array([1, 0], complex), (0, 1.0), labels=["g", "e"])
        with pytest.raises(PhaseUndefinedError):
            accumulated_phase(tr, "e")

    def test_unreliable_flag(self):
        om = mhz(20)
        H = np.array([[0, om / 2], [om / 2, 0]], complex)
        # exactly one full Rabi cycle: the ground amplitude passes through zero
        tr = propagate_schrodinger(lambda t: H, np.array([1, 0], complex), (0.0, 0.05), labels=["g", "e"])
        assert not accumulated_phase(tr, "g").reliable


@pytest.fixture(scope="module")
def cs_run():
    chans = tuple(SPECIES["Cs107p"].channels())
    system = TwoAtomSystem(LevelScheme("single_photon", chans), ghz(4))
    H = system.hamiltonian(SinglePhotonDrive(FIG2))
    L = lindblad_operators(system)
    return propagate_lindblad(H, L, bell_input(system), FIG2.span, n_samples=101, labels=system.labels, keep_states=True)


class TestLindblad:
    def test_exponential_decay(self):
        gamma = 1.7
        L = math.sqrt(gamma) * np.array([[0, 1], [0, 0]], complex)  # |0><r|
        tr = propagate_lindblad(lambda t: np.zeros((2, 2)), [L], np.diag([0, 1]).astype(complex), (0, 2.0), n_samples=41)
        np.testing.assert_allclose(tr.populations[:, 1], np.exp(-gamma * tr.times), atol=1e-8, rtol=0)

    def test_closed_system_matches_schrodinger(self):
        system = TwoAtomSystem(SC)
        H = system.hamiltonian(SinglePhotonDrive(FIG2))
        psi0 = bell_input(system)
        pure = propagate_schrodinger(H, psi0, FIG2.span, n_samples=201)
        mixed = propagate_lindblad(H, [], psi0, FIG2.span, n_samples=201, keep_states=True)
        outer = np.einsum("ki,kj->kij", pure.states, pure.states.conj())
        assert np.max(np.abs(outer - mixed.states)) < 1e-8

    def test_trace_preserved(self, cs_run):
        assert cs_run.meta["trace_drift"] < 1e-8

    def test_hermitian_throughout(self, cs_run):
        rhos = cs_run.states
        assert np.max(np.abs(rhos - rhos.conj().transpose(0, 2, 1))) < 1e-10

    def test_positive_at_end(self, cs_run):
        rho = cs_run.final_state
        assert np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() > -1e-8
        QuantumState(rho, cs_run.labels).check()

    def test_leakage_small_but_present(self, cs_run):
        logical = [i for i, lab in enumerate(cs_run.labels) if set(lab) <= {"0", "1", "r"}]
        leak = 1 - cs_run.populations[-1, logical].sum()
        assert 0 < leak < 1e-3

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            propagate_lindblad(lambda t: np.zeros((2, 2)), [], np.diag([0.5, 0.6]).astype(complex), (0, 1))


class TestObservables:
    LABELS = ["00", "01", "10", "11"]

    def test_bell_populations_and_coherence(self):
        psi = np.array([1, 0, 0, 1], complex) / math.sqrt(2)
        for data in (psi, np.outer(psi, psi.conj())):
            st = QuantumState(data, self.LABELS)
            assert population(st, "00") == pytest.approx(0.5)
            assert population(st, "11") == pytest.approx(0.5)
            assert abs(coherence(st, "00", "11")) == pytest.approx(0.5)

    def test_populations_sum_to_one(self):
        rng = np.random.default_rng(1)
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        st = QuantumState(psi / np.linalg.norm(psi), self.LABELS)
        assert sum(population(st, lab) for lab in self.LABELS) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_combination(self):
        psi = np.array([0, 1, 1, 0], complex) / math.sqrt(2)
        assert population(QuantumState(psi, self.LABELS), "01+10") == pytest.approx(1.0)

    def test_unknown_label(self):
        with pytest.raises(KeyError):
            population(QuantumState(np.array([1, 0, 0, 0], complex), self.LABELS), "rr")

    def test_state_checks(self):
        with pytest.raises(ValueError):
            QuantumState(np.array([1.0, 1.0]), ["a", "b"]).check()
        with pytest.raises(ValueError):
            QuantumState(np.array([[1.2, 0], [0, -0.2]]), ["a", "b"]).check()


def test_step_halving_convergence():
    cfg = ProtocolConfig(scheme_kind="single_photon", pulse=FIG2, blockade=ghz(4))
    f1 = prepare_bell(cfg).fidelity
    f2 = prepare_bell(cfg.set("rtol", cfg.rtol / 2).set("atol", cfg.atol / 2)).fidelity
    assert abs(f1 - f2) < 1e-9
