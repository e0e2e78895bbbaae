import numpy as np


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def orthonormal(rng, n, k):
    """``n x k`` matrix with orthonormal complex columns."""
    q, _ = np.linalg.qr(crandn(rng, n, max(k, 1)))
    return q[:, :k]


def low_rank(rng, n, p, r, sv=(0.5, 2.0)):
    """``n x p`` complex matrix of exact rank ``r`` with singular values in ``sv``."""
    U, V = orthonormal(rng, n, r), orthonormal(rng, p, r)
    s = rng.uniform(*sv, size=r)
    return (U * s) @ V.conj().T


# (rows n, columns p, rank r, member) as functions of a draw; one per dispatch branch
BRANCH_SHAPES = {
    "T22_square_full": lambda a, b: (a, a, a, True),
    "T22_tall_full_member": lambda a, b: (a + b, a, a, True),
    "T22_wide_full": lambda a, b: (a, a + b, a, True),
    "T22_deficient_member": lambda a, b: (a + b, a + 1, a, True),
    "T31a_tall_full_nonmember": lambda a, b: (a + b, a, a, False),
    "T31b_deficient_nonmember": lambda a, b: (a + 1, a + b, a, False),
}


def branch_system(rng, branch, max_dim=5):
    """Random ``(K, L, C0)`` that must classify into ``branch``.

    Members have ``L = K C0``; non-members add a unit vector orthogonal to
    the column span of ``K``.
    """
    a, b = int(rng.integers(1, max_dim)), int(rng.integers(1, 4))
    n, p, r, member = BRANCH_SHAPES[branch](a, b)
    K = low_rank(rng, n, p, r)
    C0 = crandn(rng, p, 1)
    L = K @ C0
    if not member:
        U = np.linalg.svd(K)[0]
        v = U[:, r:] @ crandn(rng, n - r, 1)
        L = L + v / np.linalg.norm(v)
    return K, L, C0
