"""Residual certificates for a computed solution.

Each certificate records what was measured and the threshold it was held
to. The optimality certificates are sampling based and therefore
probabilistic; the grid certificate is an exact backstop for ``p <= 2``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla

from .bvp import DEFAULT_THETA, ReducedSystem, SolutionBundle, Strategy, dynamics_residual
from .linalg import spectral_norm
from .oracle import (
    exhaustive_small_lsq,
    finite_difference_gradient,
    functional_value,
    grid_agreement_bound,
    local_optimality_check,
)
from .pencil import MatrixPencil, PencilPartition, WeierstrassForm

__all__ = ["Certificate", "certify_solution", "min_norm_sampling_check"]


@dataclass(frozen=True)
class Certificate:
    name: str
    passed: bool
    measured: float
    threshold: float

    def to_dict(self):
        return asdict(self)


def _norm(x) -> float:
    return float(np.linalg.norm(x, 2)) if np.size(x) else 0.0


def min_norm_sampling_check(K, C_hat, samples: int = 1000, seed: int = 0,
                            rtol: float = 1e-12) -> tuple[bool, float]:
    """Check ``||C|| <= ||C + z||`` for random ``z`` in the null space of ``K``.

    Returns ``(passed, worst_gap)`` with ``worst_gap = min ||C + z|| - ||C||``.
    """
    Z = sla.null_space(K)
    if Z.shape[1] == 0:
        return True, 0.0
    rng = np.random.default_rng(seed)
    base = _norm(C_hat)
    worst = np.inf
    for _ in range(samples):
        w = rng.standard_normal((Z.shape[1], 1)) + 1j * rng.standard_normal((Z.shape[1], 1))
        z = Z @ w
        z *= rng.uniform(1e-3, 1.0) * max(1.0, base) / _norm(z)
        worst = min(worst, _norm(C_hat + z) - base)
    return bool(worst >= -rtol * max(1.0, base)), float(worst)


def certify_solution(
    pencil: MatrixPencil,
    form: WeierstrassForm,
    part: PencilPartition,
    rs: ReducedSystem,
    bundle: SolutionBundle,
    *,
    E=None,
    theta: float | None = None,
    seed: int = 0,
    trials: int = 500,
    step: float = 1e-4,
) -> list[Certificate]:
    K, L = rs.K, rs.L
    C = bundle.C_hat
    p = K.shape[1]
    strat = bundle.strategy
    nK, nL, nC = spectral_norm(K), _norm(L), _norm(C)
    KH = K.conj().T
    certs: list[Certificate] = []

    if strat is Strategy.REGULARIZED:
        if E is None:
            E = (DEFAULT_THETA if theta is None else theta) * np.eye(p)
        A = KH @ K + E.conj().T @ E
        scale = spectral_norm(A) * nC + _norm(KH @ L)
        r = _norm(A @ C - KH @ L)
        certs.append(Certificate("regularized_stationarity", r <= 1e-10 * scale, r, 1e-10 * scale))
        h = 1e-6 * max(1.0, nC)
        g = finite_difference_gradient("D2", K, L, E, C, h=h)
        gscale = 2 * (spectral_norm(A) * nC + _norm(KH @ L))
        certs.append(Certificate("fd_gradient", _norm(g) <= 1e-6 * gscale, _norm(g), 1e-6 * gscale))
        ok = local_optimality_check(K, L, E, C, trials, step * max(1.0, nC), seed)
        certs.append(Certificate("local_optimality", ok, float(not ok), 0.0))
    elif strat in (Strategy.LEAST_SQUARES, Strategy.EXACT, Strategy.PINV):
        r = _norm(KH @ (L - K @ C))
        thr = 1e-8 * nK * nL
        certs.append(Certificate("lsq_stationarity", r <= thr, r, thr))
        ok = local_optimality_check(K, L, None, C, trials, step * max(1.0, nC), seed)
        certs.append(Certificate("local_optimality", ok, float(not ok), 0.0))

    if strat in (Strategy.EXACT, Strategy.MIN_NORM):
        r = _norm(K @ C - L)
        thr = 1e-10 * (nK * nC + nL)
        certs.append(Certificate("feasibility", r <= thr, r, thr))
    if strat in (Strategy.MIN_NORM, Strategy.PINV):
        ok, gap = min_norm_sampling_check(K, C, seed=seed)
        certs.append(Certificate("min_norm_sampling", ok, gap, 0.0))

    # growth of Jp^k bounds how large an honest dynamics residual can be
    growth, Jk = 1.0, np.eye(form.p, dtype=complex)
    for _ in range(bundle.trajectory.shape[0]):
        growth = max(growth, spectral_norm(Jk))
        Jk = form.Jp @ Jk
    dyn = dynamics_residual(pencil, bundle.trajectory)
    thr = 1e-9 * (spectral_norm(pencil.F) + spectral_norm(pencil.G)) * max(nC, 1e-300) * \
        max(1.0, spectral_norm(part.Qp)) * growth
    certs.append(Certificate("dynamics_residual", dyn <= thr, dyn, thr))

    real = not (np.any(K.imag) or np.any(L.imag) or (E is not None and np.any(np.asarray(E).imag)))
    if p <= 2 and real and strat in (Strategy.LEAST_SQUARES, Strategy.REGULARIZED, Strategy.EXACT):
        radius = max(1.0, 2.0 * float(np.max(np.abs(C))))
        steps = 10001
        Eg = np.real(E) if strat is Strategy.REGULARIZED else None
        Cg = exhaustive_small_lsq(K.real, L.real, radius, steps, E=Eg)
        spacing = 2 * radius / (steps - 1)
        # the analytic minimizer may never lose to a grid point ...
        dC, dG = functional_value(K, L, Eg, C), functional_value(K, L, Eg, Cg)
        slack = 1e-12 * max(1.0, dG)
        certs.append(Certificate("grid_value", dC <= dG + slack, dC - dG, slack))
        # ... and must lie within the grid's resolution in the Hessian metric
        d = _norm(Cg - C.real)
        bound = grid_agreement_bound(K.real, Eg, spacing)
        certs.append(Certificate("grid_oracle", d <= bound, d, bound))
    return certs
