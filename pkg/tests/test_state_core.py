import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from nosig.errors import (
    DimensionMismatchError,
    InvalidStateError,
    NumericalIntegrityError,
    OutcomeImpossibleError,
)
from nosig.state_core import (
    BipartiteState,
    DensityMatrix,
    Ensemble,
    ProjectiveMeasurement,
    PureState,
    bell_state,
    conditional_state,
    ensemble_density,
    joint_probability,
    maximally_mixed,
    partial_trace,
    purify,
    random_density,
    random_pure,
    random_unitary,
    schmidt,
    states_equal,
    tensor,
    trace_distance,
)

from conftest import ket, proj, ptrace_a_loops, ptrace_b_loops, x_pair, z_pair

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestTypes:
    def test_pure_state_norm_enforced(self):
        with pytest.raises(InvalidStateError):
            PureState(np.array([1.0, 1.0]))

    def test_density_invariants(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.diag([0.5, 0.6]))
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.array([[0.5, 1], [0, 0.5]]))
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_density_is_read_only(self):
        rho = maximally_mixed(2)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1

    def test_ensemble_drops_zero_weights(self):
        e = Ensemble(((1.0, ket(1, 0)), (0.0, ket(0, 1))))
        assert len(e) == 1

    def test_ensemble_probabilities_must_sum_to_one(self):
        with pytest.raises(InvalidStateError):
            Ensemble(((0.5, ket(1, 0)), (0.4, ket(0, 1))))

    def test_ensemble_mixed_dims_rejected(self):
        with pytest.raises(DimensionMismatchError):
            Ensemble(((0.5, ket(1, 0)), (0.5, ket(0, 1, 0))))

    def test_bipartite_size_checked(self):
        with pytest.raises(DimensionMismatchError):
            BipartiteState(2, 3, np.ones(4) / 2)

    def test_projective_measurement_checks(self):
        ProjectiveMeasurement.from_basis(random_unitary(3, seed=1))
        with pytest.raises(InvalidStateError):
            ProjectiveMeasurement((proj([1, 0]), proj([1, 1]) / 2))
        with pytest.raises(InvalidStateError):
            ProjectiveMeasurement((proj([1, 0]),))


class TestTensor:
    def test_basis_bookkeeping(self):
        out = tensor(ket(1, 0), ket(0, 1))
        assert_allclose(out.amplitudes, [0, 1, 0, 0])

    def test_identity_case(self):
        out = tensor(maximally_mixed(2), maximally_mixed(2))
        assert_allclose(out.matrix, np.eye(4) / 4)

    def test_plus_plus(self):
        # hand expansion: (1,1)/sqrt2 x (1,1)/sqrt2 = (1,1,1,1)/2
        out = tensor(ket(1, 1), ket(1, 1))
        assert_allclose(out.amplitudes, [0.5, 0.5, 0.5, 0.5], atol=1e-15)

    def test_mixed_kinds_promote(self):
        out = tensor(ket(1, 0), maximally_mixed(2))
        assert isinstance(out, DensityMatrix) and out.dim == 4


class TestPartialTrace:
    def test_bell_reduces_to_identity(self):
        assert_allclose(partial_trace(bell_state(), "A").matrix, np.eye(2) / 2, atol=1e-15)
        assert_allclose(partial_trace(bell_state().density(), "A", (2, 2)).matrix, np.eye(2) / 2, atol=1e-15)

    def test_product(self):
        s, t = random_density(2, seed=1), random_density(3, seed=2)
        assert_allclose(partial_trace(tensor(s, t), "A", (2, 3)).matrix, s.matrix, atol=1e-14)
        assert_allclose(partial_trace(tensor(s, t), "B", (2, 3)).matrix, t.matrix, atol=1e-14)

    def test_unequal_schmidt(self):
        psi = BipartiteState(2, 2, [np.sqrt(0.9), 0, 0, np.sqrt(0.1)])
        expected = ptrace_b_loops(psi.density().matrix, 2, 2)
        assert_allclose(expected, np.diag([0.9, 0.1]), atol=1e-15)
        assert_allclose(partial_trace(psi, "A").matrix, expected, atol=1e-15)

    @pytest.mark.parametrize("da,db", [(2, 3), (3, 2), (4, 4), (1, 5)])
    def test_matches_loop_oracle(self, da, db):
        rho = random_density(da * db, seed=da * 10 + db)
        assert_allclose(partial_trace(rho, "A", (da, db)).matrix, ptrace_b_loops(rho.matrix, da, db), atol=1e-14)
        assert_allclose(partial_trace(rho, "B", (da, db)).matrix, ptrace_a_loops(rho.matrix, da, db), atol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            partial_trace(random_density(6, seed=0), "A", (2, 2))

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.integers(1, 5), st.integers(1, 5))
    def test_schmidt_symmetry(self, seed, da, db):
        psi = BipartiteState(da, db, random_pure(da * db, seed).amplitudes)
        ea = np.sort(partial_trace(psi, "A").eigenvalues())[::-1]
        eb = np.sort(partial_trace(psi, "B").eigenvalues())[::-1]
        k = min(da, db)
        assert_allclose(ea[:k], eb[:k], atol=1e-9)
        assert np.all(np.abs(ea[k:]) < 1e-9) and np.all(np.abs(eb[k:]) < 1e-9)


class TestEnsembleDensity:
    def test_single(self):
        assert_allclose(ensemble_density(Ensemble(((1.0, ket(1, 0)),))).matrix, proj([1, 0]))

    def test_z_and_x_pairs_agree(self):
        z = ensemble_density(z_pair()).matrix
        x = ensemble_density(x_pair()).matrix
        assert_allclose(z, np.eye(2) / 2, atol=1e-15)
        assert np.max(np.abs(z - x)) <= 1e-12


class TestSchmidt:
    def test_product(self):
        dec = schmidt(BipartiteState(2, 2, [0, 1, 0, 0]))
        assert dec.rank == 1
        assert_allclose(dec.coefficients, [1.0])

    def test_bell(self):
        dec = schmidt(bell_state())
        assert dec.rank == 2
        assert_allclose(dec.coefficients, [0.5, 0.5])

    def test_unequal(self):
        dec = schmidt(BipartiteState(2, 2, [np.sqrt(0.9), 0, 0, np.sqrt(0.1)]))
        # SVD oracle of diag(sqrt .9, sqrt .1): singular values are the diagonal
        assert_allclose(dec.coefficients, [0.9, 0.1], atol=1e-15)
        assert abs(dec.left_vectors[0, 0]) == pytest.approx(1)
        assert abs(dec.left_vectors[1, 1]) == pytest.approx(1)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.integers(1, 6), st.integers(1, 6))
    def test_invariants(self, seed, da, db):
        psi = BipartiteState(da, db, random_pure(da * db, seed).amplitudes)
        dec = schmidt(psi)
        assert abs(dec.coefficients.sum() - 1) < 1e-9
        assert np.all(np.diff(dec.coefficients) <= 0)
        assert_allclose(dec.left_vectors.conj() @ dec.left_vectors.T, np.eye(dec.rank), atol=1e-10)
        assert_allclose(dec.right_vectors.conj() @ dec.right_vectors.T, np.eye(dec.rank), atol=1e-10)
        assert abs(np.vdot(dec.reconstruct(), psi.amplitudes)) ** 2 >= 1 - 1e-9


class TestPurify:
    def test_pure(self):
        psi = purify(DensityMatrix(proj([1, 0])))
        assert psi.dim_b == 1
        assert abs(psi.amplitudes[0]) == pytest.approx(1)

    def test_maximally_mixed(self):
        psi = purify(maximally_mixed(2))
        assert psi.dim_b == 2
        assert_allclose(schmidt(psi).coefficients, [0.5, 0.5])

    def test_diag(self):
        psi = purify(DensityMatrix(np.diag([0.9, 0.1])))
        assert_allclose(np.abs(psi.amplitudes), [np.sqrt(0.9), 0, 0, np.sqrt(0.1)], atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.integers(1, 6), st.data())
    def test_roundtrip(self, seed, dim, data):
        rank = data.draw(st.integers(1, dim))
        rho = random_density(dim, rank, seed)
        psi = purify(rho)
        assert psi.dim_b == rank
        assert np.max(np.abs(partial_trace(psi, "A").matrix - rho.matrix)) <= 1e-9
        eig = np.sort(rho.eigenvalues())[::-1][:rank]
        assert_allclose(schmidt(psi).coefficients, eig, atol=1e-9)


class TestTraceRule:
    def test_bell_correlations(self):
        rho = bell_state().density()
        assert joint_probability(rho, proj([1, 0]), proj([1, 0])) == pytest.approx(0.5)
        assert joint_probability(rho, proj([1, 0]), proj([0, 1])) == 0.0

    def test_uncorrelated(self):
        rho = tensor(maximally_mixed(2), maximally_mixed(2))
        pa, pb = random_pure(2, 1).projector(), random_pure(2, 2).projector()
        assert joint_probability(rho, pa, pb) == pytest.approx(0.25)

    def test_integrity_fault(self):
        with pytest.raises(NumericalIntegrityError):
            joint_probability(bell_state().density(), 2 * proj([1, 0]), 2 * proj([1, 0]))

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_complete_product_measurement_sums_to_one(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density(6, seed=rng)
        ua, ub = random_unitary(2, rng), random_unitary(3, rng)
        total = sum(
            joint_probability(rho, proj(ua[:, i]), proj(ub[:, j])) for i in range(2) for j in range(3)
        )
        assert abs(total - 1) <= 1e-9

    def test_conditional_bell_z(self):
        p, sigma = conditional_state(bell_state(), proj([1, 0]))
        assert p == pytest.approx(0.5)
        assert_allclose(sigma.matrix, proj([1, 0]), atol=1e-15)

    def test_conditional_bell_plus(self):
        # (|00>+|11>)/sqrt2 = (|++>+|-->)/sqrt2, so B finding + leaves A in +
        p, sigma = conditional_state(bell_state().density(), proj([1, 1]) / 2, (2, 2))
        assert p == pytest.approx(0.5)
        assert_allclose(sigma.matrix, proj([1, 1]) / 2, atol=1e-15)

    def test_conditional_product(self):
        s, t = random_density(2, seed=3), random_density(2, seed=4)
        pb = random_pure(2, 5).projector()
        p, sigma = conditional_state(tensor(s, t), pb, (2, 2))
        assert p == pytest.approx(np.real(np.trace(t.matrix @ pb)))
        assert_allclose(sigma.matrix, s.matrix, atol=1e-12)

    def test_impossible_outcome(self):
        prod = BipartiteState(2, 2, [1, 0, 0, 0])
        with pytest.raises(OutcomeImpossibleError):
            conditional_state(prod, proj([0, 1]))


class TestTraceDistance:
    def test_examples(self):
        rho = random_density(3, seed=0)
        assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-15)
        assert trace_distance(ket(1, 0), ket(0, 1)) == pytest.approx(1)
        assert trace_distance(ket(1, 0), ket(1, 1)) == pytest.approx(1 / np.sqrt(2), abs=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(seeds, st.integers(2, 5))
    def test_metric(self, seed, dim):
        rng = np.random.default_rng(seed)
        a, b, c = (random_density(dim, seed=rng) for _ in range(3))
        assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), abs=1e-12)
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9


class TestRandom:
    def test_rank_one_is_pure(self):
        assert_allclose(np.sort(random_density(4, 1, 7).eigenvalues()), [0, 0, 0, 1], atol=1e-10)

    def test_determinism(self):
        assert np.array_equal(random_pure(5, 11).amplitudes, random_pure(5, 11).amplitudes)
        assert states_equal(random_pure(5, 11), random_pure(5, 11))

    def test_unitary(self):
        u = random_unitary(3, 2)
        assert_allclose(u.conj().T @ u, np.eye(3), atol=1e-10)
