import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from cntqd.constants import HBAR
from cntqd.errors import InputError
from cntqd.qstate import (
    MAX_DIM,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    HilbertSpace,
    InvalidPartition,
    NonHermitianInput,
    Operator,
    QuantumState,
    SpaceMismatch,
    eigh,
    entanglement_entropy,
    evolve,
    evolve_many,
    kron,
    local_operator,
    propagator,
    reduced_density_matrix,
    state_fidelity,
)

QUBIT = HilbertSpace.of(("a", 2))
PAIR = HilbertSpace.of(("a", 2), ("b", 2))


def random_hermitian(rng, n, scale=1.0):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (m + m.conj().T) / 2


def random_state(rng, space):
    return QuantumState.from_vector(space, rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim))


seeds = st.integers(0, 2**32 - 1)


class TestHilbertSpace:
    def test_dims_and_labels(self):
        s = HilbertSpace.of(("spin", 2), ("valley", 2), ("n", 3))
        assert s.dim == 12
        assert s.labels == ("spin", "valley", "n")
        assert s.index("n") == 2

    def test_rejects_duplicate_labels(self):
        with pytest.raises(InputError):
            HilbertSpace.of(("a", 2), ("a", 2))

    def test_rejects_trivial_factor(self):
        with pytest.raises(InputError):
            HilbertSpace.of(("a", 1))

    def test_dimension_cap(self):
        HilbertSpace(tuple((f"q{k}", 2) for k in range(12)))
        assert 2**12 == MAX_DIM
        with pytest.raises(InputError):
            HilbertSpace(tuple((f"q{k}", 2) for k in range(13)))

    def test_tensor_renames_clashes(self):
        s = QUBIT.tensor(QUBIT)
        assert s.labels == ("a", "a_2")

    def test_basis_index_matches_kron_order(self):
        s = HilbertSpace.of(("x", 2), ("y", 3))
        v = np.kron(np.eye(2)[1], np.eye(3)[2])
        assert s.basis_index(x=1, y=2) == int(np.argmax(v))


class TestStates:
    def test_normalisation_enforced(self):
        with pytest.raises(InputError):
            QuantumState(QUBIT, np.array([1.0, 1.0]))

    def test_wrong_length(self):
        with pytest.raises(SpaceMismatch):
            QuantumState(QUBIT, np.array([1.0, 0, 0]))

    def test_zero_vector(self):
        with pytest.raises(InputError):
            QuantumState.from_vector(QUBIT, [0, 0])

    def test_amplitudes_read_only(self):
        psi = QuantumState.basis(QUBIT, 0)
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 2

    def test_overlap_space_check(self):
        with pytest.raises(SpaceMismatch):
            QuantumState.basis(QUBIT, 0).overlap(QuantumState.basis(PAIR, 0))


class TestOperators:
    def test_hermitian_flag_checked(self):
        with pytest.raises(NonHermitianInput):
            Operator(QUBIT, np.array([[0, 1], [0, 0]]), hermitian=True)

    def test_local_operator_is_kron(self):
        op = local_operator(PAIR, {"b": SIGMA_X})
        assert np.array_equal(op.entries, np.kron(np.eye(2), SIGMA_X))

    def test_local_operator_unknown_label(self):
        with pytest.raises(InputError):
            local_operator(PAIR, {"c": SIGMA_X})

    def test_algebra(self):
        x = local_operator(QUBIT, {"a": SIGMA_X}, hermitian=True)
        y = local_operator(QUBIT, {"a": SIGMA_Y}, hermitian=True)
        z = local_operator(QUBIT, {"a": SIGMA_Z}, hermitian=True)
        comm = (x @ y) - (y @ x)
        assert np.allclose(comm.entries, 2j * z.entries)
        assert (2 * x).hermitian and not (1j * x).hermitian

    def test_kron_space(self):
        x = Operator(QUBIT, SIGMA_X, hermitian=True)
        k = kron(x, x)
        assert k.space.labels == ("a", "a_2")

    def test_space_mismatch_on_add(self):
        with pytest.raises(SpaceMismatch):
            Operator.identity(QUBIT) + Operator.identity(PAIR)


class TestEigenAndEvolution:
    @settings(max_examples=30, deadline=None)
    @given(seeds, st.integers(2, 16))
    def test_eigh_reconstructs(self, seed, n):
        rng = np.random.default_rng(seed)
        h = Operator(HilbertSpace.of(("x", n)), random_hermitian(rng, n), hermitian=True)
        w, v = eigh(h)
        assert np.all(np.diff(w) >= 0)
        assert np.allclose(v @ np.diag(w) @ v.conj().T, h.entries, atol=1e-12)
        assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seeds, st.floats(-10, 10))
    def test_propagator_matches_expm(self, seed, t):
        rng = np.random.default_rng(seed)
        h = Operator(PAIR, random_hermitian(rng, 4, 3.0), hermitian=True)
        ref = scipy.linalg.expm(-1j * h.entries * t / HBAR)
        assert np.max(np.abs(propagator(h, t).entries - ref)) < 1e-10

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_norm_conserved(self, seed):
        rng = np.random.default_rng(seed)
        h = Operator(PAIR, random_hermitian(rng, 4, 50.0), hermitian=True)
        psi = random_state(rng, PAIR)
        amps = evolve_many(h, psi, np.linspace(0, 100, 50))
        assert np.max(np.abs(np.linalg.norm(amps, axis=1) - 1)) < 1e-12

    def test_evolve_many_consistent(self):
        rng = np.random.default_rng(1)
        h = Operator(PAIR, random_hermitian(rng, 4), hermitian=True)
        psi = random_state(rng, PAIR)
        amps = evolve_many(h, psi, [0.0, 1.3])
        assert np.allclose(amps[0], psi.amplitudes)
        assert np.allclose(amps[1], evolve(h, psi, 1.3).amplitudes, atol=1e-13)

    def test_larmor_precession(self):
        # h = (Δ/2) σz: <σx>(t) = cos(Δ t / ħ)
        delta = 2.0
        h = Operator(QUBIT, 0.5 * delta * SIGMA_Z, hermitian=True)
        plus = QuantumState.from_vector(QUBIT, [1, 1])
        sx = Operator(QUBIT, SIGMA_X, hermitian=True)
        for t in (0.0, 0.3, 1.7):
            got = sx.expectation(evolve(h, plus, t)).real
            assert got == pytest.approx(np.cos(delta * t / HBAR), abs=1e-13)


class TestPartialTrace:
    def test_product_state(self):
        a = QuantumState.from_vector(QUBIT, [1, 2j])
        b = QuantumState.from_vector(QUBIT, [3, 1])
        rho = reduced_density_matrix(a.tensor(b), ["a"])
        assert np.allclose(rho, a.density_matrix(), atol=1e-14)

    def test_density_matrix_input_matches_state_input(self):
        rng = np.random.default_rng(3)
        s = HilbertSpace.of(("a", 2), ("b", 3), ("c", 2))
        psi = random_state(rng, s)
        for keep in (["a"], ["b"], ["c", "a"], ["b", "c"]):
            r1 = reduced_density_matrix(psi, keep)
            r2 = reduced_density_matrix(psi.density_matrix(), keep, s)
            assert np.allclose(r1, r2, atol=1e-14)
            assert np.trace(r1).real == pytest.approx(1.0, abs=1e-12)

    def test_density_matrix_needs_space(self):
        with pytest.raises(InputError):
            reduced_density_matrix(np.eye(4) / 4, ["a"])

    def test_repeated_label(self):
        with pytest.raises(InvalidPartition):
            reduced_density_matrix(QuantumState.basis(PAIR, 0), ["a", "a"])


class TestEntropyAndFidelity:
    def test_bell_state_one_bit(self):
        bell = QuantumState.from_vector(PAIR, [1, 0, 0, 1])
        assert entanglement_entropy(bell, ["a"]) == pytest.approx(1.0, abs=1e-14)

    def test_product_zero(self):
        assert entanglement_entropy(QuantumState.basis(PAIR, 2), ["b"]) == 0.0

    def test_empty_cut(self):
        with pytest.raises(InvalidPartition):
            entanglement_entropy(QuantumState.basis(PAIR, 0), [])

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_entropy_matches_eigenvalue_route(self, seed):
        rng = np.random.default_rng(seed)
        s = HilbertSpace.of(("a", 2), ("b", 3))
        psi = random_state(rng, s)
        p = np.linalg.eigvalsh(reduced_density_matrix(psi, ["a"]))
        p = p[p > 1e-16]
        ref = -np.sum(p * np.log2(p))
        assert entanglement_entropy(psi, ["a"]) == pytest.approx(ref, abs=1e-10)
        assert entanglement_entropy(psi, ["b"]) == pytest.approx(ref, abs=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_fidelity_pure_states(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_state(rng, PAIR), random_state(rng, PAIR)
        f = state_fidelity(a.density_matrix(), b.density_matrix())
        assert f == pytest.approx(abs(a.overlap(b)) ** 2, abs=1e-10)

    def test_fidelity_identity(self):
        rho = np.diag([0.3, 0.7])
        assert state_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-14)
