"""Independent checks for the decomposition and the solvers.

Nothing here calls the solvers it is meant to certify: pencils are built
from a known canonical form, optimality is probed by sampling the objective,
gradients come from central differences, and tiny problems are settled by
brute-force grid search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import as_column, as_matrix
from .pencil import MatrixPencil, WeierstrassForm, canonical_order

__all__ = [
    "ConstructedPencil",
    "exhaustive_small_lsq",
    "finite_difference_gradient",
    "functional_value",
    "local_optimality_check",
    "random_invertible",
    "random_regular_pencil",
    "shift_blocks",
]

LAYOUTS = ("distinct", "clustered", "jordan")


@dataclass(frozen=True)
class ConstructedPencil:
    F: np.ndarray
    G: np.ndarray
    ground_truth: WeierstrassForm
    seed: int
    layout: str = "distinct"

    @property
    def pencil(self) -> MatrixPencil:
        return MatrixPencil(self.F, self.G)


def random_invertible(n: int, rng: np.random.Generator, cond_cap: float) -> np.ndarray:
    """Real ``n x n`` matrix with singular values spread log-uniformly in ``[1, cond_cap]``."""
    if n == 0:
        return np.zeros((0, 0))
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.exp(rng.uniform(0.0, np.log(cond_cap), n))
    s[0] = 1.0
    if n > 1:
        s[-1] = cond_cap
    return (U * s) @ V.T


def shift_blocks(sizes) -> np.ndarray:
    """Block diagonal matrix of upper shift (nilpotent Jordan) blocks."""
    n = int(sum(sizes))
    H = np.zeros((n, n))
    i = 0
    for b in sizes:
        for j in range(b - 1):
            H[i + j, i + j + 1] = 1.0
        i += b
    return H


def _partition(n: int, rng: np.random.Generator, max_block: int) -> list[int]:
    sizes = []
    while n > 0:
        b = int(rng.integers(1, min(n, max_block) + 1))
        sizes.append(b)
        n -= b
    return sizes


def _distinct_values(k: int, rng: np.random.Generator, gap: float = 0.05) -> np.ndarray:
    # draw from a grid so every pair is at least `gap` apart
    grid = np.arange(-1.0, 1.0 + gap / 2, gap)
    return rng.choice(grid, size=k, replace=False)


def _finite_block(p: int, layout: str, rng: np.random.Generator):
    """Jordan matrix and its block structure [(value, size), ...]."""
    if p == 0:
        return np.zeros((0, 0)), []
    if layout == "distinct":
        vals = _distinct_values(p, rng)
        blocks = [(float(v), 1) for v in vals]
    elif layout == "clustered":
        # repeated but semisimple eigenvalues
        sizes = _partition(p, rng, 3)
        vals = _distinct_values(len(sizes), rng)
        blocks = [(float(v), 1) for v, s in zip(vals, sizes) for _ in range(s)]
    elif layout == "jordan":
        sizes = _partition(p, rng, 2)
        vals = _distinct_values(len(sizes), rng)
        blocks = [(float(v), s) for v, s in zip(vals, sizes)]
    else:
        raise ValueError(f"unknown layout {layout!r}; choose from {LAYOUTS}")
    J = np.zeros((p, p))
    i = 0
    for v, s in blocks:
        J[i:i + s, i:i + s] = v * np.eye(s) + shift_blocks([s])
        i += s
    return J, blocks


def random_regular_pencil(
    p: int,
    q: int,
    seed: int,
    cond_cap: float = 1e3,
    layout: str = "distinct",
    max_nilpotent_block: int = 3,
) -> ConstructedPencil:
    """Build ``F = P^{-1} diag(I, H) Q^{-1}``, ``G = P^{-1} diag(J, I) Q^{-1}``.

    ``P`` and ``Q`` have condition number at most ``cond_cap``; ``H`` is a
    direct sum of upper shift blocks of size at most ``max_nilpotent_block``.
    """
    if p + q < 1:
        raise ValueError("need p + q >= 1")
    if cond_cap <= 1:
        raise ValueError("cond_cap must exceed 1")
    rng = np.random.default_rng(seed)
    m = p + q
    P = random_invertible(m, rng, cond_cap)
    Q = random_invertible(m, rng, cond_cap)
    J, blocks = _finite_block(p, layout, rng)
    H = shift_blocks(_partition(q, rng, max_nilpotent_block)) if q else np.zeros((0, 0))
    Pinv = np.linalg.inv(P)
    Qinv = np.linalg.inv(Q)
    F = Pinv @ sla.block_diag(np.eye(p), H) @ Qinv
    G = Pinv @ sla.block_diag(J, np.eye(q)) @ Qinv

    mult: dict[float, int] = {}
    for v, s in blocks:
        mult[v] = mult.get(v, 0) + s
    vals = list(mult)
    eigs = [(complex(vals[i]), mult[vals[i]]) for i in canonical_order(vals)]
    q_star = 0
    if q:
        Hk, q_star = np.eye(q), 0
        while np.any(Hk):
            Hk = Hk @ H
            q_star += 1
    truth = WeierstrassForm(P=P.astype(complex), Q=Q.astype(complex), Jp=J.astype(complex),
                            Hq=H.astype(complex), p=p, q=q, q_star=q_star,
                            finite_eigenvalues=eigs)
    return ConstructedPencil(F, G, truth, seed, layout)


def _prep(K, L, E):
    K = as_matrix(K, "K")
    L = as_column(L, "L")
    E = np.zeros((0, K.shape[1]), dtype=complex) if E is None else as_matrix(E, "E")
    return K, L, E


def functional_value(K, L, E, C) -> float:
    """``||L - K C||^2 + ||E C||^2`` (the regularized functional; ``E = None`` gives plain least squares)."""
    K, L, E = _prep(K, L, E)
    C = as_column(C, "C")
    return float(np.linalg.norm(L - K @ C) ** 2 + np.linalg.norm(E @ C) ** 2)


def local_optimality_check(K, L, E, C_hat, trials: int = 500, step: float = 1e-4,
                           seed: int = 0, rtol: float = 1e-12) -> bool:
    """Probabilistic test that ``C_hat`` minimizes the regularized functional.

    Samples ``trials`` random complex unit directions ``d`` and checks
    ``D(C_hat) <= D(C_hat + step * d)`` up to a roundoff allowance of
    ``rtol * max(1, D(C_hat))``.
    """
    K, L, E = _prep(K, L, E)
    C = as_column(C_hat, "C_hat")
    rng = np.random.default_rng(seed)
    n = C.shape[0]
    if n == 0:
        return True
    base = functional_value(K, L, E, C)
    slack = rtol * max(1.0, base)
    for _ in range(trials):
        d = rng.standard_normal((n, 1)) + 1j * rng.standard_normal((n, 1))
        d /= np.linalg.norm(d)
        if functional_value(K, L, E, C + step * d) < base - slack:
            return False
    return True


def finite_difference_gradient(functional_id: str, K, L, E, at, h: float = 1e-6,
                               lam=None) -> np.ndarray:
    """Central-difference gradient with respect to ``conj(C)`` scaled by 2.

    For real-valued ``D`` of complex ``C = x + i y`` this returns
    ``dD/dx + i dD/dy``, which for ``D2`` equals
    ``-2 K^* L + 2 K^* K C + 2 E^* E C``.

    ``functional_id`` is ``"D2"`` or ``"D4"`` (same form) or
    ``"D3_fixed_lambda"``, the minimum-norm Lagrangian
    ``||C||^2 + Re(lam^* (L - K C))`` with the multiplier ``lam`` held fixed.
    """
    K, L, E = _prep(K, L, E)
    C = as_column(at, "at")
    if functional_id in ("D2", "D4"):
        def D(c):
            return functional_value(K, L, E, c)
    elif functional_id == "D3_fixed_lambda":
        if lam is None:
            raise ValueError("D3_fixed_lambda needs lam")
        lam = as_column(lam, "lam")

        def D(c):
            return float(np.linalg.norm(c) ** 2 + (lam.conj().T @ (L - K @ c)).real[0, 0])
    else:
        raise ValueError(f"unknown functional {functional_id!r}")
    if h <= 0:
        raise ValueError("h must be positive")
    n = C.shape[0]
    g = np.zeros((n, 1), dtype=complex)
    for i in range(n):
        e = np.zeros((n, 1), dtype=complex)
        e[i] = h
        gx = (D(C + e) - D(C - e)) / (2 * h)
        gy = (D(C + 1j * e) - D(C - 1j * e)) / (2 * h)
        g[i] = gx + 1j * gy
    return g


def grid_agreement_bound(K, E, spacing: float) -> float:
    """Largest distance a grid minimizer can sit from the true minimizer.

    With Hessian ``H = K^T K + E^T E`` and mesh spacing ``h`` the grid
    minimizer ``G`` satisfies ``lmin |G - C|^2 <= D(G) - D(C) <=
    lmax (h sqrt(p) / 2)^2``, i.e. ``|G - C| <= (h sqrt(p) / 2) sqrt(cond H)``.
    Only for ``cond H <= 2`` does this reduce to one grid spacing.
    """
    K = as_matrix(K, "K")
    p = K.shape[1]
    A = K if E is None else np.vstack([K, as_matrix(E, "E")])
    s = np.linalg.svd(A, compute_uv=False)
    if s.size < p or s[-1] == 0:
        return np.inf
    return spacing * np.sqrt(p) / 2 * (s[0] / s[-1])


def exhaustive_small_lsq(K, L, grid_radius: float = 5.0, grid_steps: int = 10001,
                         E=None) -> np.ndarray:
    """Grid minimizer of ``||L - K C||^2 (+ ||E C||^2)`` over ``[-r, r]^p`` for real ``C``, ``p <= 2``.

    The result is the minimizer over the full ``grid_steps**p`` mesh. For
    ``p = 2`` the mesh is not materialized: for each grid value of the first
    coordinate the objective is a convex quadratic in the second, whose
    vertex is located from three evaluations, so only the two grid points
    bracketing it can be the row minimum. Nothing but objective evaluations
    is used, which keeps the oracle independent of the solvers.
    """
    K, L, E = _prep(K, L, E)
    p = K.shape[1]
    if p > 2:
        raise ValueError(f"grid search supports p <= 2, got p={p}")
    if p == 0:
        return np.zeros((0, 1))
    A = np.vstack([K, E])
    b = np.vstack([L, np.zeros((E.shape[0], 1))])

    def objective(pts):
        # pts: (p, n) real candidates
        r = A @ pts - b
        return np.sum(np.abs(r) ** 2, axis=0)

    xs = np.linspace(-grid_radius, grid_radius, grid_steps)
    if p == 1:
        return np.array([[xs[np.argmin(objective(xs[None, :]))]]])

    h = xs[1] - xs[0]

    def at(x, y):
        return objective(np.vstack([x, y]))

    zero, one = np.zeros_like(xs), np.ones_like(xs)
    f0, fp, fm = at(xs, zero), at(xs, one), at(xs, -one)
    curv = (fp + fm - 2 * f0) / 2
    slope = (fp - fm) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = np.where(curv > 0, -slope / (2 * curv), 0.0)
    idx = np.clip(np.floor((vertex + grid_radius) / h), 0, grid_steps - 1).astype(int)
    best_val = np.full(grid_steps, np.inf)
    best_y = np.zeros(grid_steps)
    for cand in (idx - 1, idx, idx + 1, idx + 2):
        cand = np.clip(cand, 0, grid_steps - 1)
        vals = at(xs, xs[cand])
        better = vals < best_val
        best_val = np.where(better, vals, best_val)
        best_y = np.where(better, xs[cand], best_y)
    k = int(np.argmin(best_val))
    return np.array([[xs[k]], [best_y[k]]])
