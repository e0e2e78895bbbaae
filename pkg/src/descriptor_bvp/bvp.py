"""Two-point boundary value problems for ``F Y_{k+1} = G Y_k``.

Every solution of the dynamics with a regular pencil has the form
``Y_k = Qp Jp^k C``, so the boundary conditions ``A1 Y_0 = B1`` and
``A2 Y_N = B2`` collapse to the reduced system ``K C = L`` with::

    K = [A1 Qp ; A2 Qp Jp^N]        L = [B1 ; B2]

The problem is then classified by the rank of ``K`` and whether ``L`` is in
its column span, and ``C`` is chosen by the matching optimality criterion:
exact solve, least squares, minimum norm, pseudoinverse or the
regularized functional ``||L - K C||^2 + ||E C||^2``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import (
    as_column,
    as_matrix,
    default_rank_tol,
    pseudoinverse,
    solve_hermitian_spd,
    spectral_norm,
)
from .pencil import (
    MatrixPencil,
    PencilPartition,
    WeierstrassForm,
    weierstrass_decompose,
)

__all__ = [
    "DEFAULT_THETA",
    "BoundaryValueProblem",
    "Case",
    "ConsistencyReport",
    "NoFiniteDynamicsError",
    "ReducedSystem",
    "SolutionBundle",
    "Strategy",
    "StrategyError",
    "Branch",
    "build_reduced_system",
    "classify",
    "solve_bvp",
    "solve_exact",
    "solve_least_squares",
    "solve_min_norm",
    "solve_pinv",
    "solve_regularized",
    "solve_with",
    "trajectory",
]

DEFAULT_THETA = 1e-5


class NoFiniteDynamicsError(ValueError):
    """``p = 0``: the only trajectory is ``Y_k = 0``."""


class StrategyError(ValueError):
    """A solver was asked to run outside its preconditions."""


class Case(str, enum.Enum):
    UNIQUE = "UniqueSolution"
    INFINITE = "InfiniteSolutions"
    NONE = "NoSolution"


class Branch(str, enum.Enum):
    SQUARE_FULL = "T22_square_full"
    TALL_FULL_MEMBER = "T22_tall_full_member"
    WIDE_FULL = "T22_wide_full"
    DEFICIENT_MEMBER = "T22_deficient_member"
    TALL_FULL_NONMEMBER = "T31a_tall_full_nonmember"
    DEFICIENT_NONMEMBER = "T31b_deficient_nonmember"


class Strategy(str, enum.Enum):
    EXACT = "exact"
    PINV = "pinv"
    MIN_NORM = "minnorm"
    REGULARIZED = "regularized"
    LEAST_SQUARES = "lsq"


@dataclass(frozen=True)
class BoundaryValueProblem:
    pencil: MatrixPencil
    A1: np.ndarray
    B1: np.ndarray
    A2: np.ndarray
    B2: np.ndarray
    N: int

    def __post_init__(self):
        m = self.pencil.m
        A1 = _rows(self.A1, m, "A1")
        A2 = _rows(self.A2, m, "A2")
        B1 = _vec(self.B1, A1.shape[0], "B1")
        B2 = _vec(self.B2, A2.shape[0], "B2")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        for name, val in (("A1", A1), ("A2", A2), ("B1", B1), ("B2", B2), ("N", int(self.N))):
            object.__setattr__(self, name, val)

    @property
    def r1(self) -> int:
        return self.A1.shape[0]

    @property
    def r2(self) -> int:
        return self.A2.shape[0]


def _rows(A, m, name):
    arr = np.asarray(A, dtype=complex)
    if arr.size == 0:
        return np.zeros((0, m), dtype=complex)
    arr = as_matrix(arr, name)
    if arr.shape[1] != m:
        if arr.shape == (m, 1):
            arr = arr.T
        else:
            raise ValueError(f"{name} must have {m} columns, got shape {arr.shape}")
    return arr


def _vec(B, n, name):
    arr = np.asarray(B, dtype=complex)
    if arr.size == 0 and n == 0:
        return np.zeros((0, 1), dtype=complex)
    arr = as_column(arr, name)
    if arr.shape[0] != n:
        raise ValueError(f"{name} has {arr.shape[0]} entries, expected {n}")
    return arr


@dataclass(frozen=True)
class ReducedSystem:
    K: np.ndarray
    L: np.ndarray
    r1: int = 0

    @property
    def p(self) -> int:
        return self.K.shape[1]

    @property
    def n_eq(self) -> int:
        return self.K.shape[0]

    @classmethod
    def of(cls, K, L) -> "ReducedSystem":
        K = as_matrix(K, "K")
        L = as_column(L, "L")
        if L.shape[0] != K.shape[0]:
            raise ValueError(f"L has {L.shape[0]} entries, K has {K.shape[0]} rows")
        return cls(K, L, K.shape[0])


@dataclass(frozen=True)
class ConsistencyReport:
    rank_K: int
    full_rank: bool
    membership: bool
    case: Case
    theorem_branch: Branch
    strategy: Strategy
    p: int
    n_eq: int
    rank_tol: float

    def to_dict(self) -> dict:
        return {
            "rank_K": self.rank_K,
            "full_rank": self.full_rank,
            "membership": self.membership,
            "case": self.case.value,
            "theorem_branch": self.theorem_branch.value,
            "strategy": self.strategy.value,
            "p": self.p,
            "r1_plus_r2": self.n_eq,
            "rank_tol": self.rank_tol,
        }


@dataclass(frozen=True)
class SolutionBundle:
    C_hat: np.ndarray
    strategy: Strategy
    trajectory: np.ndarray  # (N + 1, m); row k is Y_k
    dynamics_residual: float
    boundary_residual: tuple[float, float]
    perturbation_magnitude: float


def build_reduced_system(form: WeierstrassForm, part: PencilPartition,
                         bvp: BoundaryValueProblem) -> ReducedSystem:
    """Assemble ``K = [A1 Qp ; A2 Qp Jp^N]`` and ``L = [B1 ; B2]``."""
    if form.p == 0:
        raise NoFiniteDynamicsError("no finite dynamics: p = 0, only Y_k = 0 solves the system")
    Qp = part.Qp
    if Qp.shape != (bvp.pencil.m, form.p):
        raise ValueError(f"Qp has shape {Qp.shape}, expected ({bvp.pencil.m}, {form.p})")
    JN = np.linalg.matrix_power(form.Jp, bvp.N)
    K = np.vstack([bvp.A1 @ Qp, bvp.A2 @ Qp @ JN])
    L = np.vstack([bvp.B1, bvp.B2])
    return ReducedSystem(K, L, bvp.r1)


def _rank_and_tol(K: np.ndarray, tol):
    s = np.linalg.svd(K, compute_uv=False) if K.size else np.zeros(0)
    if tol is None:
        tol = default_rank_tol(s, K.shape)
    return int(np.count_nonzero(s > tol)), float(tol)


def _member(K, L, rank_tol, member_tol):
    resid = L - K @ (pseudoinverse(K, rank_tol) @ L)
    return bool(np.linalg.norm(resid) <= member_tol * max(1.0, np.linalg.norm(L)))


def classify(rs: ReducedSystem, p: int | None = None, tol: float | None = None,
             member_tol: float = 1e-10) -> ConsistencyReport:
    """Decide solvability of ``K C = L`` and the solution strategy.

    ``tol`` is the singular value threshold for the rank of ``K`` (default
    ``sigma_max * max(shape) * eps``); ``member_tol`` is the relative
    projection residual below which ``L`` counts as in the column span.

    The dispatch is total. With ``n = r1 + r2`` and ``r = rank K``:

    ========================  ===========  ==========  =================
    condition                 member       case        strategy
    ========================  ===========  ==========  =================
    r = p = n                 (always)     unique      exact
    r = p < n                 yes          unique      exact
    r = p < n                 no           none        least squares
    r = n < p                 (always)     infinite    minimum norm
    r < min(p, n)             yes          infinite    pseudoinverse
    r < min(p, n)             no           none        regularized
    ========================  ===========  ==========  =================
    """
    K, L = rs.K, rs.L
    if p is None:
        p = K.shape[1]
    if K.shape[1] != p:
        raise ValueError(f"K has {K.shape[1]} columns but p = {p}")
    n = K.shape[0]
    r, rtol = _rank_and_tol(K, tol)
    member = _member(K, L, rtol, member_tol)
    full = r == min(p, n)

    if r == p and p == n:
        case, branch, strat = Case.UNIQUE, Branch.SQUARE_FULL, Strategy.EXACT
    elif r == p and p < n:
        if member:
            case, branch, strat = Case.UNIQUE, Branch.TALL_FULL_MEMBER, Strategy.EXACT
        else:
            case, branch, strat = Case.NONE, Branch.TALL_FULL_NONMEMBER, Strategy.LEAST_SQUARES
    elif r == n and n < p:
        case, branch, strat = Case.INFINITE, Branch.WIDE_FULL, Strategy.MIN_NORM
    elif member:
        case, branch, strat = Case.INFINITE, Branch.DEFICIENT_MEMBER, Strategy.PINV
    else:
        case, branch, strat = Case.NONE, Branch.DEFICIENT_NONMEMBER, Strategy.REGULARIZED
    # full-rank square / wide systems are always consistent; keep the flag honest
    if case is not Case.NONE:
        member = True
    return ConsistencyReport(r, full, member, case, branch, strat, p, n, rtol)


def solve_least_squares(rs: ReducedSystem, tol: float | None = None) -> np.ndarray:
    """``C = (K^* K)^{-1} K^* L``; requires full column rank."""
    K, L = rs.K, rs.L
    r, _ = _rank_and_tol(K, tol)
    if r < K.shape[1]:
        raise StrategyError(
            f"K is rank deficient (rank {r} < p = {K.shape[1]}); use the regularized solver")
    KH = K.conj().T
    return solve_hermitian_spd(KH @ K, KH @ L)


def _regularizer(p: int, E, theta):
    if E is None:
        theta = DEFAULT_THETA if theta is None else float(theta)
        if theta <= 0:
            raise ValueError("theta must be positive")
        return None, theta
    E = as_matrix(E, "E")
    if E.shape[1] != p:
        raise ValueError(f"E must have p = {p} columns, got {E.shape}")
    return E, spectral_norm(E)


def solve_regularized(rs: ReducedSystem, E=None, theta: float | None = None,
                      tol: float | None = None) -> np.ndarray:
    """Minimizer of ``||L - K C||^2 + ||E C||^2``, i.e. ``(K^*K + E^*E)^{-1} K^* L``.

    With ``E`` omitted, ``E = theta * I`` (``theta`` defaults to 1e-5) and
    the minimizer is evaluated through the SVD of ``K`` as
    ``sum_i sigma_i / (sigma_i^2 + theta^2) v_i u_i^* L``. Singular values at
    or below the rank threshold ``tol`` count as exact zeros, matching the
    rank decision made by :func:`classify`; forming the normal equations
    instead would amplify roundoff by ``1 / theta^2``.

    A general ``E`` is handled as the stacked least-squares problem
    ``[K; E] C ~ [L; 0]``.
    """
    K, L = rs.K, rs.L
    p = K.shape[1]
    E, th = _regularizer(p, E, theta)
    if th >= 0.1:
        warnings.warn(f"||E||_2 = {th:g} is not small; the regularized solution is strongly biased",
                      stacklevel=2)
    KH = K.conj().T
    EH_E = (th**2) * np.eye(p) if E is None else E.conj().T @ E
    A = KH @ K + EH_E
    try:
        # precondition check only; the answer comes from a better-conditioned route
        sla.cho_factor(0.5 * (A + A.conj().T))
    except np.linalg.LinAlgError as exc:
        raise StrategyError(f"E too small: K^*K + E^*E is not positive definite ({exc})") from exc

    if E is None:
        U, s, Vh = np.linalg.svd(K, full_matrices=False)
        _, rtol = _rank_and_tol(K, tol)
        s = np.where(s > rtol, s, 0.0)
        filt = s / (s**2 + th**2)
        return Vh.conj().T @ (filt[:, None] * (U.conj().T @ L))
    stacked = np.vstack([K, E])
    rhs = np.vstack([L, np.zeros((E.shape[0], 1), dtype=complex)])
    C, *_ = sla.lstsq(stacked, rhs)
    return C


def solve_pinv(rs: ReducedSystem, tol: float | None = None) -> np.ndarray:
    """``C = K^+ L``."""
    return pseudoinverse(rs.K, tol) @ rs.L


def solve_min_norm(rs: ReducedSystem, tol: float | None = None) -> np.ndarray:
    """``C = K^* (K K^*)^{-1} L`` for wide ``K`` of full row rank."""
    K, L = rs.K, rs.L
    n, p = K.shape
    r, _ = _rank_and_tol(K, tol)
    if not (p > n and r == n):
        raise StrategyError(
            f"minimum-norm solve needs p > r1 + r2 and full row rank (p={p}, rows={n}, rank={r}); "
            "use the regularized or pseudoinverse solver")
    KH = K.conj().T
    return KH @ solve_hermitian_spd(K @ KH, L)


def solve_exact(rs: ReducedSystem, tol: float | None = None,
                member_tol: float = 1e-10) -> np.ndarray:
    """The unique ``C`` with ``K C = L``."""
    rep = classify(rs, tol=tol, member_tol=member_tol)
    if rep.case is not Case.UNIQUE:
        raise StrategyError(f"no unique solution: problem is {rep.case.value} ({rep.theorem_branch.value})")
    return pseudoinverse(rs.K, rep.rank_tol) @ rs.L


def solve_with(strategy: Strategy | str, rs: ReducedSystem, *, E=None, theta=None,
               tol=None, member_tol: float = 1e-10) -> np.ndarray:
    strategy = Strategy(strategy)
    if strategy is Strategy.EXACT:
        return solve_exact(rs, tol, member_tol)
    if strategy is Strategy.LEAST_SQUARES:
        return solve_least_squares(rs, tol)
    if strategy is Strategy.MIN_NORM:
        return solve_min_norm(rs, tol)
    if strategy is Strategy.PINV:
        return solve_pinv(rs, tol)
    return solve_regularized(rs, E=E, theta=theta, tol=tol)


def trajectory(form: WeierstrassForm, part: PencilPartition, C_hat, N: int) -> np.ndarray:
    """``Y_k = Qp Jp^k C`` for ``k = 0..N``, as rows of an ``(N + 1, m)`` array."""
    C = as_column(C_hat, "C_hat")
    if C.shape[0] != form.p:
        raise ValueError(f"C_hat has {C.shape[0]} entries, expected p = {form.p}")
    m = part.Qp.shape[0]
    Y = np.zeros((N + 1, m), dtype=complex)
    z = C
    for k in range(N + 1):
        Y[k] = (part.Qp @ z)[:, 0]
        z = form.Jp @ z
    return Y


def dynamics_residual(pencil: MatrixPencil, Y: np.ndarray) -> float:
    """``max_k ||F Y_{k+1} - G Y_k||_2`` over ``k = 0..N-1``."""
    if Y.shape[0] < 2:
        return 0.0
    R = Y[1:] @ pencil.F.T - Y[:-1] @ pencil.G.T
    return float(np.max(np.linalg.norm(R, axis=1)))


def solve_bvp(
    bvp: BoundaryValueProblem,
    *,
    tol: float | None = None,
    theta: float | None = None,
    E=None,
    strategy: Strategy | str | None = None,
    wcf: tuple[WeierstrassForm, PencilPartition] | None = None,
    seed: int = 0,
    member_tol: float = 1e-10,
) -> tuple[ConsistencyReport, SolutionBundle]:
    """Decompose (or use ``wcf``), reduce, classify and solve.

    ``strategy`` overrides the automatic choice; the chosen solver still
    enforces its own preconditions and raises :class:`StrategyError`.

    Raises
    ------
    SingularPencilError, NoFiniteDynamicsError, StrategyError
    """
    form, part = wcf if wcf is not None else weierstrass_decompose(bvp.pencil, seed=seed)
    rs = build_reduced_system(form, part, bvp)
    report = classify(rs, form.p, tol, member_tol)
    chosen = report.strategy if strategy in (None, "auto") else Strategy(strategy)
    C = solve_with(chosen, rs, E=E, theta=theta, tol=report.rank_tol, member_tol=member_tol)
    Y = trajectory(form, part, C, bvp.N)
    bundle = SolutionBundle(
        C_hat=C,
        strategy=chosen,
        trajectory=Y,
        dynamics_residual=dynamics_residual(bvp.pencil, Y),
        boundary_residual=(
            float(np.linalg.norm(bvp.A1 @ Y[0][:, None] - bvp.B1)),
            float(np.linalg.norm(bvp.A2 @ Y[-1][:, None] - bvp.B2)),
        ),
        perturbation_magnitude=float(np.linalg.norm(rs.L - rs.K @ C)),
    )
    return report, bundle
