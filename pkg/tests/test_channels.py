import numpy as np
import pytest
from numpy.testing import assert_allclose

from nosig.channels import (
    ChoiMatrix,
    KrausChannel,
    LinearMapSpec,
    RawMatrix,
    apply,
    apply_matrix,
    choi_from_kraus,
    extend_and_apply,
    is_completely_positive,
    is_positive_sampled,
    is_trace_preserving,
    kraus_from_choi,
    random_channel,
)
from nosig.errors import NotCompletelyPositiveError
from nosig.state_core import DensityMatrix, bell_state, random_density, random_unitary

from conftest import proj

PAULIS = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]


def shift_by_quarter_identity():
    # rho -> rho - Tr(rho) I/4, not positive
    j_id = choi_from_kraus(KrausChannel((np.eye(2),))).matrix
    return LinearMapSpec.from_choi(ChoiMatrix(2, 2, j_id - np.eye(4) / 4))


class TestChoiFromKraus:
    def test_identity(self):
        j = choi_from_kraus(KrausChannel((np.eye(2),)))
        expected = np.zeros((4, 4))
        for i in range(2):
            for k in range(2):
                expected[3 * i, 3 * k] = 1  # |ii><kk|
        assert_allclose(j.matrix, expected)
        assert_allclose(np.linalg.eigvalsh(j.matrix), [0, 0, 0, 2], atol=1e-12)

    def test_fully_depolarizing(self):
        j = choi_from_kraus(KrausChannel(tuple(0.5 * p for p in PAULIS)))
        assert_allclose(np.linalg.eigvalsh(j.matrix), [0.5] * 4, atol=1e-12)

    def test_unitary_rank_one(self):
        j = choi_from_kraus(KrausChannel((random_unitary(2, 3),)))
        assert_allclose(np.linalg.eigvalsh(j.matrix), [0, 0, 0, 2], atol=1e-12)


class TestKrausFromChoi:
    def test_identity(self):
        k = kraus_from_choi(LinearMapSpec.identity(2).choi())
        assert len(k.operators) == 1
        op = k.operators[0]
        assert_allclose(op / op[0, 0], np.eye(2), atol=1e-12)

    def test_depolarizing_rank(self):
        assert len(kraus_from_choi(LinearMapSpec.depolarizing(2, 1.0).choi()).operators) == 4
        assert len(kraus_from_choi(LinearMapSpec.depolarizing(2, 0.5).choi()).operators) == 4

    def test_transpose_not_cp(self):
        with pytest.raises(NotCompletelyPositiveError) as info:
            kraus_from_choi(LinearMapSpec.transpose(2).choi())
        assert info.value.eigenvalue == pytest.approx(-1, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_roundtrip_choi(self, seed):
        c = random_channel(3, 2, seed=seed)
        j = c.choi()
        assert np.max(np.abs(choi_from_kraus(kraus_from_choi(j)).matrix - j.matrix)) <= 1e-8


class TestApply:
    def test_identity(self):
        rho = random_density(3, seed=0)
        assert_allclose(apply(LinearMapSpec.identity(3), rho).matrix, rho.matrix)

    def test_transpose_flips_y_eigenstate(self):
        plus_i, minus_i = np.array([1, 1j]) / np.sqrt(2), np.array([1, -1j]) / np.sqrt(2)
        out = apply(LinearMapSpec.transpose(2), DensityMatrix(proj(plus_i)))
        assert_allclose(out.matrix, proj(minus_i), atol=1e-15)
        assert_allclose(apply(LinearMapSpec.transpose(2), DensityMatrix(proj(plus_i)), "choi").matrix,
                        proj(minus_i), atol=1e-15)

    def test_full_depolarization(self):
        rho = random_density(2, seed=4)
        assert_allclose(apply(LinearMapSpec.depolarizing(2, 1), rho).matrix, np.eye(2) / 2, atol=1e-14)

    @pytest.mark.parametrize("m", [
        LinearMapSpec.identity(3),
        LinearMapSpec.depolarizing(3, 0.3),
        LinearMapSpec.unitary(random_unitary(3, 1)),
        LinearMapSpec.transpose(3),
        random_channel(3, 3, seed=5),
    ], ids=["identity", "depolarizing", "unitary", "transpose", "random"])
    def test_routes_agree(self, m):
        for seed in range(5):
            rho = random_density(3, seed=seed).matrix
            assert np.max(np.abs(apply_matrix(m, rho, "choi") - apply_matrix(m, rho))) <= 1e-10

    def test_non_state_output_flagged(self):
        out = apply(shift_by_quarter_identity(), DensityMatrix(proj([1, 0])))
        assert isinstance(out, RawMatrix) and not out.is_state
        assert out.min_eigenvalue == pytest.approx(-0.25)

    @pytest.mark.parametrize("seed", range(5))
    def test_linearity(self, seed):
        rng = np.random.default_rng(seed)
        m = random_channel(3, 2, seed=rng)
        ps = rng.dirichlet(np.ones(4))
        rhos = [random_density(3, seed=rng) for _ in range(4)]
        mixed = DensityMatrix(sum(p * r.matrix for p, r in zip(ps, rhos)))
        lhs = apply(m, mixed).matrix
        rhs = sum(p * apply(m, r).matrix for p, r in zip(ps, rhos))
        assert np.max(np.abs(lhs - rhs)) <= 1e-10
        assert abs(np.trace(lhs).real - 1) <= 1e-9


class TestCertification:
    def test_cp(self):
        ok, lam = is_completely_positive(LinearMapSpec.identity(2).choi())
        assert ok and abs(lam) <= 1e-10
        ok, lam = is_completely_positive(LinearMapSpec.transpose(2).choi())
        assert not ok and lam == pytest.approx(-1, abs=1e-12)
        assert is_completely_positive(random_channel(2, seed=1).choi())[0]

    def test_tp(self):
        ok, dev = is_trace_preserving(LinearMapSpec.unitary(random_unitary(2, 0)).choi())
        assert ok and dev <= 1e-10
        j = LinearMapSpec.unitary(random_unitary(2, 0)).choi()
        ok, dev = is_trace_preserving(ChoiMatrix(2, 2, 0.5 * j.matrix))
        assert not ok and dev == pytest.approx(0.5)
        ok, dev = is_trace_preserving(LinearMapSpec.transpose(2).choi())
        assert ok and dev <= 1e-10

    def test_positive_sampled(self):
        ok, worst = is_positive_sampled(LinearMapSpec.transpose(2), 1000, seed=0)
        assert ok and worst >= -1e-9
        ok, worst = is_positive_sampled(shift_by_quarter_identity(), 50, seed=0)
        assert not ok and worst == pytest.approx(-0.25)

    @pytest.mark.parametrize("seed", range(10))
    def test_cp_implies_sampled_positive(self, seed):
        m = random_channel(3, seed=seed)
        assert is_completely_positive(m.choi())[0]
        assert is_positive_sampled(m, 50, seed)[0]

    def test_kraus_closure_flag(self):
        assert random_channel(4, 2, seed=0).kraus().is_trace_preserving
        assert not KrausChannel((0.5 * np.eye(2),)).is_trace_preserving


class TestExtension:
    def test_partial_transpose_of_bell(self):
        out, lam = extend_and_apply(LinearMapSpec.transpose(2), bell_state(), (2, 2))
        assert lam == pytest.approx(-0.5, abs=1e-12)
        # oracle: partial transpose by index swapping
        oracle = bell_state().density().matrix.reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4)
        assert_allclose(out, oracle, atol=1e-15)

    def test_identity_extension(self):
        rho = random_density(6, seed=2)
        out, lam = extend_and_apply(LinearMapSpec.identity(2), rho, (2, 3))
        assert_allclose(out, rho.matrix, atol=1e-15)
        assert lam >= -1e-9 * 6

    def test_depolarizing_kills_correlations(self):
        out, lam = extend_and_apply(LinearMapSpec.depolarizing(2, 1), bell_state(), (2, 2))
        assert_allclose(out, np.eye(4) / 4, atol=1e-15)
        assert lam == pytest.approx(0.25)

    def test_matches_kraus_on_joint_state(self):
        m = random_channel(2, 3, seed=8)
        rho = random_density(4, seed=9)
        out, _ = extend_and_apply(m, rho, (2, 2))
        expected = sum(np.kron(k, np.eye(2)) @ rho.matrix @ np.kron(k, np.eye(2)).conj().T
                       for k in m.kraus().operators)
        assert_allclose(out, expected, atol=1e-13)
