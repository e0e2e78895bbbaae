import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from descriptor_bvp import reference_problems as ref
from descriptor_bvp.linalg import (
    NotPositiveDefiniteError,
    colspan_membership,
    numerical_rank,
    pseudoinverse,
    solve_hermitian_spd,
    spectral_norm,
    svd,
)

from _helpers import crandn


def low_rank(rng, rows, cols, rank):
    return crandn(rng, rows, rank) @ crandn(rng, rank, cols)


def penrose_residuals(A, X):
    AX, XA = A @ X, X @ A
    return (
        np.linalg.norm(AX @ A - A, 2),
        np.linalg.norm(XA @ X - X, 2),
        np.linalg.norm(AX.conj().T - AX, 2),
        np.linalg.norm(XA.conj().T - XA, 2),
    )


class TestSvd:
    def test_identity(self):
        U, s, V = svd(np.eye(2))
        np.testing.assert_allclose(s, [1, 1])
        np.testing.assert_allclose(np.abs(U), np.eye(2), atol=1e-15)
        np.testing.assert_allclose(np.abs(V), np.eye(2), atol=1e-15)

    def test_diagonal(self):
        np.testing.assert_allclose(svd(np.diag([3.0, 0.0])).singular_values, [3, 0])

    def test_random_reconstruction(self, rng):
        A = rng.standard_normal((5, 3))
        U, s, V = svd(A)
        S = np.zeros((5, 3))
        S[:3, :3] = np.diag(s)
        assert np.linalg.norm(A - U @ S @ V.conj().T, 2) <= 1e-12
        assert np.all(np.diff(s) <= 0) and np.all(s >= 0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 50), st.integers(1, 50), st.integers(0, 2**32 - 1))
    def test_reconstruction_and_unitarity(self, rows, cols, seed):
        A = crandn(np.random.default_rng(seed), rows, cols)
        U, s, V = svd(A)
        S = np.zeros((rows, cols))
        k = min(rows, cols)
        S[:k, :k] = np.diag(s)
        assert np.linalg.norm(A - U @ S @ V.conj().T, 2) <= 1e-10
        assert np.linalg.norm(U.conj().T @ U - np.eye(rows), 2) <= 1e-10
        assert np.linalg.norm(V.conj().T @ V - np.eye(cols), 2) <= 1e-10


class TestRank:
    def test_identity(self):
        assert numerical_rank(np.eye(2)) == 2

    def test_proportional_rows(self):
        assert numerical_rank([[1, 2], [2, 4]]) == 1

    @pytest.mark.parametrize("c", [24 / 36, 0.25**4])
    def test_deficient_reduced_matrix(self, c):
        K = np.zeros((5, 3))
        K[0] = [1, 1, 0]
        K[4] = [0, 0, c]
        assert numerical_rank(K) == 2

    def test_explicit_tolerance(self):
        assert numerical_rank(np.diag([1.0, 1e-6]), tol=1e-5) == 1

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 15), st.integers(1, 15), st.integers(1, 15), st.integers(0, 2**32 - 1))
    def test_rank_of_adjoint(self, rows, cols, r, seed):
        A = low_rank(np.random.default_rng(seed), rows, cols, min(r, rows, cols))
        assert numerical_rank(A) == numerical_rank(A.conj().T)


class TestPseudoinverse:
    def test_identity(self):
        np.testing.assert_allclose(pseudoinverse(np.eye(3)), np.eye(3))

    def test_zero(self):
        X = pseudoinverse(np.zeros((2, 3)))
        assert X.shape == (3, 2) and not np.any(X)

    def test_rank_one_two_by_two(self):
        A = np.array([[1.0, 1.0], [0.0, 0.0]])
        X = pseudoinverse(A)
        # the four Penrose identities pin X down uniquely
        assert max(penrose_residuals(A, X)) <= 1e-15
        np.testing.assert_allclose(X, [[0.5, 0], [0.5, 0]], atol=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 20), st.integers(1, 20), st.integers(0, 20), st.integers(0, 2**32 - 1))
    def test_penrose_conditions(self, rows, cols, r, seed):
        rng = np.random.default_rng(seed)
        r = min(r, rows, cols)
        A = low_rank(rng, rows, cols, r) if r else np.zeros((rows, cols))
        X = pseudoinverse(A)
        bound = 1e-10 * (1 + spectral_norm(A))
        assert max(penrose_residuals(A, X)) <= bound


class TestSpd:
    def test_identity(self):
        np.testing.assert_allclose(solve_hermitian_spd(np.eye(2), [3, 4]).ravel(), [3, 4])

    def test_diagonal(self):
        np.testing.assert_allclose(solve_hermitian_spd(np.diag([2.0, 8.0]), [2, 16]).ravel(), [1, 2])

    def test_random_residual(self, rng):
        M = crandn(rng, 6, 6)
        A = M.conj().T @ M + np.eye(6)
        b = crandn(rng, 6, 2)
        assert np.linalg.norm(A @ solve_hermitian_spd(A, b) - b, 2) <= 1e-10

    def test_indefinite_reports_pivot(self):
        with pytest.raises(NotPositiveDefiniteError) as info:
            solve_hermitian_spd(np.diag([1.0, 4.0, -1.0]), np.ones(3))
        assert info.value.pivot == 2


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(np.eye(3)) == pytest.approx(1.0)

    def test_single_entry(self):
        assert spectral_norm(np.diag([1e-5, 0.0])) == pytest.approx(1e-5, rel=1e-14)

    def test_matches_svd(self, rng):
        A = crandn(rng, 7, 4)
        assert abs(spectral_norm(A) - svd(A).singular_values[0]) <= 1e-12


class TestColspan:
    def test_identity(self, rng):
        assert colspan_membership(np.eye(2), rng.standard_normal(2))

    def test_outside(self):
        assert not colspan_membership([[1.0], [0.0]], [0.0, 1.0])

    def test_deficient_reference_data(self):
        K = np.vstack([np.array([[1, 1, 0]]), np.zeros((3, 3)), [[0, 0, 0.25**4]]])
        L = np.array([0, 0, 36, 0, 24.0])
        assert not colspan_membership(K, L)
        assert not colspan_membership(ref.PUBLISHED_K_DEFICIENT, L)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_image_is_member(self, rows, cols, r, seed):
        rng = np.random.default_rng(seed)
        A = low_rank(rng, rows, cols, min(r, rows, cols))
        x = crandn(rng, cols, 1)
        x /= np.linalg.norm(x)
        assert colspan_membership(A, A @ x)
