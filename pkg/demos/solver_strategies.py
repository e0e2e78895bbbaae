"""
Choosing a solver from the reduced system
=========================================

Every boundary value problem reduces to ``K C = L`` with ``p`` unknowns.
The rank of ``K`` and whether ``L`` lies in its column span decide between
an exact solve, least squares, the minimum-norm solution, the
pseudoinverse, and Tikhonov regularization.
"""

import numpy as np

from descriptor_bvp import ReducedSystem, classify, pseudoinverse, solve_regularized
from descriptor_bvp.bvp import solve_with

rng = np.random.default_rng(0)

# %%
# One small system per dispatch branch.
systems = {
    "square, full rank": (np.eye(2), [1.0, 1.0]),
    "tall, consistent": ([[1, 0], [0, 1], [1, 1]], [1.0, 2.0, 3.0]),
    "tall, inconsistent": ([[1], [1]], [1.0, 3.0]),
    "wide, full row rank": ([[1, 1]], [2.0]),
    "rank deficient, consistent": ([[1, 1], [2, 2], [0, 0]], [1.0, 2.0, 0.0]),
    "rank deficient, inconsistent": ([[1, 1], [1, 1]], [1.0, 2.0]),
}
for label, (K, L) in systems.items():
    rs = ReducedSystem.of(K, L)
    rep = classify(rs)
    C = solve_with(rep.strategy, rs)
    print(f"{label:30s} {rep.case.value:18s} {rep.strategy.value:12s} C = {np.round(C.real.ravel(), 6)}")

# %%
# Tikhonov regularization with ``E = theta I`` tends to the pseudoinverse
# solution as ``theta`` shrinks, monotonically.
K = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 4))
L = rng.standard_normal((6, 1))
rs = ReducedSystem.of(K, L)
target = pseudoinverse(K, 1e-10) @ L
for theta in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
    err = np.linalg.norm(solve_regularized(rs, theta=theta, tol=1e-10) - target)
    print(f"theta={theta:.0e}  |C_theta - K^+ L| = {err:.3e}")

# %%
# A general ``E`` must make ``K^* K + E^* E`` invertible; one that vanishes
# on the kernel of ``K`` is rejected.
try:
    solve_regularized(ReducedSystem.of([[1, 1], [1, 1]], [1, 2]), E=[[1e-3, 1e-3]])
except ValueError as exc:
    print(type(exc).__name__, "-", exc)
