"""A five-state descriptor system with two sets of boundary data.

The pencil has finite eigenvalues 1/2, 0, 1/4 and a double infinite
eigenvalue. ``REFERENCE_QP`` / ``REFERENCE_JP`` are a hand-derived finite
part (unnormalized eigenvectors), used to reproduce the published numbers
through :func:`descriptor_bvp.pencil.inject_form`.

``deficient_problem`` has a rank-deficient reduced matrix and inconsistent
data; ``full_rank_problem`` has a full column rank reduced matrix and
inconsistent data. The ``PUBLISHED_*`` constants are the values printed
alongside them; they do not all follow from the matrices (see the
discrepancy demo).
"""

from fractions import Fraction

import numpy as np

from .bvp import BoundaryValueProblem
from .pencil import MatrixPencil

F = np.array([
    [0, 1, 0, 0, 0],
    [0, 0, 0, 0, -1],
    [1, -1, 0, 1, -1],
    [1, -1, 0, 2, -1],
    [0, 0, 0, 0, 0],
], dtype=float)

G = np.array([
    [0, 0, 1, -1, 1],
    [0, 0, 0, 0, -0.25],
    [0.5, -0.5, 0, -0.5, 0.5],
    [0.5, -0.5, 1, -0.5, 0.75],
    [0, 0, 0, 1, -1],
], dtype=float)

REFERENCE_QP = np.array([
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 0],
    [0, 0, 1],
    [0, 0, 1],
], dtype=float)

REFERENCE_JP = np.diag([0.5, 0.0, 0.25])

# det(sF - G) = -(s - 1/2) s (s - 1/4), highest power first
DET_COEFFS = np.array([0.0, 0.0, -1.0, 0.75, -0.125, 0.0])

N = 4
THETA = 1e-5

# E with a single entry theta in row 1, column 2
PUBLISHED_E = np.zeros((5, 3))
PUBLISHED_E[0, 1] = THETA

PUBLISHED_K_DEFICIENT = np.array([
    [1, 1, 0],
    [0, 0, 0],
    [0, 0, 0],
    [0, 0, 0],
    [0, 0, 24 / 36],
])
# rows 4 and 5 of the published optimal trajectory are this times 4**-k
PUBLISHED_DEFICIENT_COEFF = Fraction(11, 14)

PUBLISHED_K_FULL_RANK = np.array([
    [36, 36, 0],
    [0, 36, 0],
    [0, 0, 36],
    [0, 0, 36],
    [358, 35, 24],
], dtype=float)
PUBLISHED_C_FULL_RANK = np.array([0.0349, -0.0166, 0.5006])


def pencil() -> MatrixPencil:
    return MatrixPencil(F, G)


def deficient_problem() -> BoundaryValueProblem:
    A1 = np.array([
        [1, 0, 0, 0, 0],
        [0, 0, 0, 1, -1],
        [0, 0, 1, 0, 0],
        [0, 0, 1, 0, 0],
    ], dtype=float)
    A2 = np.array([[0, 0, 0, 0, 1]], dtype=float)
    return BoundaryValueProblem(pencil(), A1, [0, 0, 36, 0], A2, [24], N)


def full_rank_problem() -> BoundaryValueProblem:
    A1 = np.array([
        [1, 0, 0, 0, 0],
        [0, 1, 0, 0, 0],
        [0, 0, 1, 0, 0],
        [0, 0, 0, 0, 1],
    ], dtype=float)
    A2 = np.array([[1, 0, 0, 0, 1]], dtype=float)
    return BoundaryValueProblem(pencil(), A1, [0, 0, 0, 36], A2, [24], N)
