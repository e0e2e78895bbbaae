"""Boundary value problems for regular descriptor difference systems.

``F Y_{k+1} = G Y_k`` with ``A1 Y_0 = B1`` and ``A2 Y_N = B2``, where ``F``
may be singular but ``sF - G`` is regular.

>>> from descriptor_bvp import reference_problems, solve_bvp
>>> report, sol = solve_bvp(reference_problems.full_rank_problem())
>>> report.case.value, report.strategy.value
('NoSolution', 'lsq')
"""

from .bvp import (
    BoundaryValueProblem,
    Branch,
    Case,
    ConsistencyReport,
    NoFiniteDynamicsError,
    ReducedSystem,
    SolutionBundle,
    Strategy,
    StrategyError,
    build_reduced_system,
    classify,
    solve_bvp,
    solve_exact,
    solve_least_squares,
    solve_min_norm,
    solve_pinv,
    solve_regularized,
    trajectory,
)
from .linalg import (
    colspan_membership,
    numerical_rank,
    pseudoinverse,
    solve_hermitian_spd,
    spectral_norm,
    svd,
)
from .pencil import (
    DefectiveError,
    MatrixPencil,
    PencilPartition,
    SingularPencilError,
    WeierstrassForm,
    inject_form,
    is_regular,
    verify_wcf,
    weierstrass_decompose,
)

__version__ = "0.1.0"
