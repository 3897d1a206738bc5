import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densub.admm import (
    SolveConfig,
    matrix_shrink,
    soft_threshold,
    solve,
    update_Q,
    update_W,
    update_Z,
)
from densub.errors import InputError
from densub.relaxation import ProblemInstance


class TestSoftThreshold:
    def test_above(self):
        assert soft_threshold(2.0, 0.5) == 1.5

    def test_inside(self):
        assert soft_threshold(0.3, 0.5) == 0.0

    def test_below(self):
        assert soft_threshold(-2.0, 0.5) == -1.5

    def test_negative_phi_rejected(self):
        with pytest.raises(InputError):
            soft_threshold(1.0, -0.1)


class TestMatrixShrink:
    def test_zero_matrix(self):
        assert np.allclose(matrix_shrink(np.zeros((3, 4)), 1.0), 0.0)

    def test_rank_one(self):
        u = np.array([1.0, 0, 0])
        v = np.array([0, 1.0, 0, 0])
        out = matrix_shrink(3.0 * np.outer(u, v), 1.0)
        assert np.allclose(out, 2.0 * np.outer(u, v))

    def test_identity(self):
        assert np.allclose(matrix_shrink(np.eye(2), 0.4), 0.6 * np.eye(2))

    def test_zero_phi_is_identity_map(self):
        rng = np.random.default_rng(0)
        Mt = rng.standard_normal((6, 5))
        assert np.allclose(matrix_shrink(Mt, 0.0), Mt, atol=1e-12)


class TestBlockUpdates:
    def test_q_no_mask(self):
        X = np.full((3, 3), 0.4)
        Y = np.full((3, 3), 0.1)
        L = np.full((3, 3), 0.2)
        out = update_Q(X, Y, L, 0.5, np.ones((3, 3)))
        assert np.allclose(out, 0.4 - 0.1 + 0.1)

    def test_q_full_mask(self):
        out = update_Q(np.ones((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), 1.0, np.zeros((2, 2)))
        assert np.all(out == 0)

    def test_q_equal_xy(self):
        X = np.full((2, 2), 0.3)
        out = update_Q(X, X, np.zeros((2, 2)), 1.0, np.ones((2, 2)))
        assert np.all(out == 0)

    def test_w_shift_from_zero(self):
        out = update_W(np.zeros((4, 4)), np.zeros((4, 4)), 1.0, 2, 2)
        assert np.allclose(out, 0.25)

    def test_w_already_correct(self):
        X = np.full((4, 4), 4.0 / 16.0)
        out = update_W(X, np.zeros((4, 4)), 1.0, 2, 2)
        assert np.allclose(out, X)

    def test_z_clamps(self):
        X = np.array([[1.7, -0.2], [0.5, 0.0]])
        out = update_Z(X, np.zeros((2, 2)), 1.0)
        assert np.allclose(out, [[1.0, 0.0], [0.5, 0.0]])


def planted_instance(M=8, k=3, seed=0):
    A = np.zeros((M, M), dtype=int)
    A[:k, :k] = 1
    return A


class TestSolve:
    def test_all_ones_trivial(self):
        A = np.ones((4, 4), dtype=int)
        res = solve(ProblemInstance(A, 4, 4), SolveConfig(4, 4, gamma=1.0))
        assert res.converged
        assert np.allclose(np.rint(res.X), 1.0)
        nuclear = np.linalg.svd(res.X, compute_uv=False).sum()
        assert nuclear == pytest.approx(4.0, abs=1e-2)

    def test_planted_block_in_zeros(self):
        A = planted_instance()
        res = solve(ProblemInstance(A, 3, 3), SolveConfig(3, 3, gamma=1.0))
        X0 = np.zeros((8, 8))
        X0[:3, :3] = 1.0
        assert np.linalg.norm(np.rint(res.X) - X0) == 0

    def test_maxiter_one(self):
        A = planted_instance()
        res = solve(ProblemInstance(A, 3, 3), SolveConfig(3, 3, gamma=1.0, maxiter=1))
        assert not res.converged
        assert res.iterations == 1
        assert len(res.primal_residuals) == 1
        assert len(res.dual_residuals) == 1

    def test_deterministic(self):
        A = planted_instance(seed=1)
        r1 = solve(ProblemInstance(A, 3, 3), SolveConfig(3, 3, gamma=0.7, maxiter=50))
        r2 = solve(ProblemInstance(A, 3, 3), SolveConfig(3, 3, gamma=0.7, maxiter=50))
        assert np.array_equal(r1.X, r2.X)
        assert r1.primal_residuals == r2.primal_residuals

    def test_iterate_invariants(self):
        rng = np.random.default_rng(5)
        A = (rng.random((12, 12)) < 0.4).astype(int)
        A[:4, :4] = 1
        res = solve(ProblemInstance(A, 4, 4), SolveConfig(4, 4, gamma=0.9))
        assert np.all(res.Q[A == 0] == 0)
        # the box constraint is enforced through the Z block, so X satisfies
        # it only up to the convergence tolerance
        slack = 10 * res.primal_residuals[-1] * max(np.linalg.norm(res.X), 1.0)
        assert res.X.min() >= -slack and res.X.max() <= 1 + slack

    def test_config_validation(self):
        with pytest.raises(InputError):
            SolveConfig(2, 2, gamma=1.0, tau=0.0)
        with pytest.raises(InputError):
            SolveConfig(2, 2, gamma=1.0, maxiter=0)
        with pytest.raises(InputError):
            SolveConfig(2, 2, gamma=-1.0)


@st.composite
def random_matrix(draw, shape=(50, 50)):
    seed = draw(st.integers(0, 2**32 - 1))
    scale = draw(st.floats(0.1, 10.0))
    return np.random.default_rng(seed).standard_normal(shape) * scale


class TestUpdateProperties:
    """Randomized contracts for the proximal blocks (50x50 inputs)."""

    @given(Mt=random_matrix(), phi=st.floats(0.0, 5.0))
    @settings(max_examples=100, deadline=None)
    def test_shrink_singular_value_law(self, Mt, phi):
        out = matrix_shrink(Mt, phi)
        sv_in = np.linalg.svd(Mt, compute_uv=False)
        sv_out = np.linalg.svd(out, compute_uv=False)
        expected = np.maximum(sv_in - phi, 0.0)
        assert np.allclose(np.sort(sv_out), np.sort(expected), rtol=1e-9, atol=1e-9)

    @given(X=random_matrix(), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_w_sum_exact(self, X, seed):
        L = np.random.default_rng(seed).standard_normal((50, 50))
        out = update_W(X, L, 0.5, 7, 9)
        assert out.sum() == pytest.approx(63.0, rel=1e-9, abs=1e-9)

    @given(X=random_matrix(), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_z_range(self, X, seed):
        L = np.random.default_rng(seed).standard_normal((50, 50))
        out = update_Z(X, L, 0.5)
        assert out.min() >= 0.0 and out.max() <= 1.0

    @given(X=random_matrix(), seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_q_mask(self, X, seed):
        rng = np.random.default_rng(seed)
        Y = rng.standard_normal((50, 50))
        L = rng.standard_normal((50, 50))
        A = (rng.random((50, 50)) < 0.5).astype(int)
        out = update_Q(X, Y, L, 0.5, A)
        assert np.all(out[A == 0] == 0)
        expected = (X - Y + 0.5 * L)[A == 1]
        assert np.allclose(out[A == 1], expected, rtol=1e-9)
