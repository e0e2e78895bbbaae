"""Dense complex linear algebra with explicit tolerance handling.

Every matrix in the package is a 2-D ``complex128`` ndarray. Column vectors
are kept as ``(n, 1)`` arrays so that shapes stay honest through products.
The LAPACK drivers do the heavy lifting; this module pins down the
tolerance conventions that the rank decisions elsewhere depend on.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import lapack

EPS = np.finfo(float).eps

__all__ = [
    "EPS",
    "NotPositiveDefiniteError",
    "SvdConvergenceError",
    "SvdResult",
    "as_matrix",
    "as_column",
    "colspan_membership",
    "default_rank_tol",
    "numerical_rank",
    "pseudoinverse",
    "solve_hermitian_spd",
    "spectral_norm",
    "svd",
]


class SvdConvergenceError(np.linalg.LinAlgError):
    """Raised when the SVD iteration fails to converge.

    The offending matrix is kept on ``matrix`` so callers can inspect it.
    """

    def __init__(self, matrix, message="SVD did not converge"):
        super().__init__(message)
        self.matrix = matrix


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization breaks down.

    ``pivot`` is the 0-based index of the first non-positive pivot.
    """

    def __init__(self, pivot: int):
        super().__init__(f"matrix is not positive definite (failing pivot index {pivot})")
        self.pivot = pivot


class SvdResult(NamedTuple):
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array.

    Scalars become 1x1 and 1-D input becomes a column.
    """
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got {arr.ndim} dimensions")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_column(b, name: str = "vector") -> np.ndarray:
    arr = as_matrix(b, name)
    if arr.shape[1] != 1:
        if arr.shape[0] == 1:
            return arr.T.copy()
        raise ValueError(f"{name} must be a column vector, got shape {arr.shape}")
    return arr


def svd(A) -> SvdResult:
    """Full SVD ``A = U @ diag(s) @ V^*`` with ``U``, ``V`` square unitary."""
    A = as_matrix(A)
    try:
        U, s, Vh = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(A, str(exc)) from exc
    return SvdResult(U, s, Vh.conj().T)


def default_rank_tol(s: np.ndarray, shape: tuple[int, int]) -> float:
    """``sigma_max * max(rows, cols) * eps``."""
    if s.size == 0:
        return 0.0
    return float(s[0]) * max(shape) * EPS


def numerical_rank(A, tol: float | None = None) -> int:
    """Number of singular values strictly above ``tol``."""
    A = as_matrix(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if tol is None:
        tol = default_rank_tol(s, A.shape)
    return int(np.count_nonzero(s > tol))


def pseudoinverse(A, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse via the SVD.

    Singular values at or below ``tol`` are treated as zero; the default
    threshold matches :func:`numerical_rank`. The zero matrix maps to the
    zero matrix of transposed shape.
    """
    A = as_matrix(A)
    rows, cols = A.shape
    if A.size == 0:
        return np.zeros((cols, rows), dtype=complex)
    try:
        U, s, Vh = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(A, str(exc)) from exc
    if tol is None:
        tol = default_rank_tol(s, A.shape)
    keep = s > tol
    if not np.any(keep):
        return np.zeros((cols, rows), dtype=complex)
    Vk = Vh[keep].conj().T
    Uk = U[:, keep]
    return (Vk / s[keep]) @ Uk.conj().T


def solve_hermitian_spd(A, b) -> np.ndarray:
    """Solve ``A x = b`` for Hermitian positive definite ``A`` by Cholesky."""
    A = as_matrix(A, "A")
    b = as_matrix(b, "b")
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"A must be square, got {A.shape}")
    if b.shape[0] != n:
        raise ValueError(f"b has {b.shape[0]} rows, expected {n}")
    # symmetrize to damp roundoff asymmetry from K^*K style products
    H = 0.5 * (A + A.conj().T)
    c, info = lapack.zpotrf(H, lower=False, clean=True)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise ValueError(f"illegal argument to potrf (info={info})")
    x, info = lapack.zpotrs(c, b, lower=False)
    if info != 0:
        raise ValueError(f"potrs failed (info={info})")
    return x


def spectral_norm(A) -> float:
    A = as_matrix(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[0])


def colspan_membership(A, b, tol: float | None = None) -> bool:
    """Whether ``b`` lies in the column span of ``A``.

    Tested through the projection residual ``||b - A A^+ b||`` relative to
    ``max(1, ||b||)``; ``tol`` defaults to 1e-10.
    """
    A = as_matrix(A, "A")
    b = as_matrix(b, "b")
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"b has {b.shape[0]} rows, A has {A.shape[0]}")
    if tol is None:
        tol = 1e-10
    resid = b - A @ (pseudoinverse(A) @ b)
    return bool(np.linalg.norm(resid, 2) <= tol * max(1.0, np.linalg.norm(b, 2)))
