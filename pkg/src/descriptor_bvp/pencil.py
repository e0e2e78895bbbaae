"""Regular matrix pencils ``sF - G`` and their Weierstrass canonical form.

For a regular pencil there are invertible ``P``, ``Q`` with::

    P F Q = [[I_p, 0], [0, H_q]]      P G Q = [[J_p, 0], [0, I_q]]

where ``J_p`` is in Jordan form (the finite eigenvalues) and ``H_q`` is
nilpotent (the infinite eigenvalue). The decomposition here is numerical:

1. the number ``q`` of infinite eigenvalues is fixed by the Wong sequence
   ``W_{i+1} = F^{-1}(G W_i)``, whose rank decisions are far better
   conditioned than thresholding the QZ ``beta`` values (defective infinite
   eigenvalues scatter like ``eps**(1/k)``);
2. a complex QZ of ``(G, F)`` is reordered so the ``p = m - q`` most finite
   eigenvalues lead;
3. the coupling blocks are removed with a Stein equation;
4. the finite block is brought to Jordan form cluster by cluster.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .linalg import EPS, as_matrix, spectral_norm

__all__ = [
    "DefectiveError",
    "MatrixPencil",
    "PencilPartition",
    "RegularityVerdict",
    "SingularPencilError",
    "WeierstrassForm",
    "canonical_order",
    "infinite_multiplicity",
    "inject_form",
    "is_regular",
    "nilpotency_index",
    "verify_finite_part",
    "verify_wcf",
    "weierstrass_decompose",
]


class SingularPencilError(ValueError):
    """The pencil ``sF - G`` is singular (``det`` vanishes identically)."""


class DefectiveError(np.linalg.LinAlgError):
    """A Jordan basis could not be built with acceptable conditioning.

    ``cluster`` holds the eigenvalues of the offending group.
    """

    def __init__(self, message, cluster=()):
        super().__init__(message)
        self.cluster = list(cluster)


@dataclass(frozen=True)
class MatrixPencil:
    """The pair ``(F, G)`` defining ``F Y_{k+1} = G Y_k``."""

    F: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        F = as_matrix(self.F, "F")
        G = as_matrix(self.G, "G")
        if F.shape[0] != F.shape[1]:
            raise ValueError(f"F must be square, got {F.shape}")
        if F.shape != G.shape:
            raise ValueError(f"F and G differ in shape: {F.shape} vs {G.shape}")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)

    @property
    def m(self) -> int:
        return self.F.shape[0]

    def det(self, s: complex) -> complex:
        return complex(np.linalg.det(s * self.F - self.G))


@dataclass(frozen=True)
class RegularityVerdict:
    regular: bool
    points: np.ndarray
    det_magnitudes: np.ndarray
    # sigma_min / sigma_max of s F - G at each point; this is what is thresholded
    rel_sigma_min: np.ndarray
    tol: float

    def __bool__(self):
        return self.regular


@dataclass(frozen=True)
class WeierstrassForm:
    """Canonical blocks of a regular pencil.

    ``P``, ``Q`` and ``Hq`` are ``None`` for a partially injected form,
    where only the finite part (``Qp``, ``Jp``) is known.
    """

    P: np.ndarray | None
    Q: np.ndarray | None
    Jp: np.ndarray
    Hq: np.ndarray | None
    p: int
    q: int
    q_star: int
    finite_eigenvalues: list[tuple[complex, int]] = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.p + self.q


@dataclass(frozen=True)
class PencilPartition:
    """Column split ``Q = [Qp | Qq]`` and row split ``P = [P1; P2]``."""

    Qp: np.ndarray
    Qq: np.ndarray | None = None
    P1: np.ndarray | None = None
    P2: np.ndarray | None = None

    @classmethod
    def from_form(cls, form: WeierstrassForm) -> "PencilPartition":
        p = form.p
        return cls(Qp=form.Q[:, :p], Qq=form.Q[:, p:], P1=form.P[:p, :], P2=form.P[p:, :])


def _pencil_scale(pencil: MatrixPencil) -> float:
    return max(spectral_norm(pencil.F), spectral_norm(pencil.G), np.finfo(float).tiny)


def is_regular(pencil: MatrixPencil, seed: int = 0, tol: float | None = None) -> RegularityVerdict:
    """Test ``det(sF - G) != 0`` at ``m + 1`` seeded random points.

    A polynomial of degree at most ``m`` that vanishes at ``m + 1`` distinct
    points vanishes identically, so a single well-conditioned evaluation
    certifies regularity. The decision uses the normalized smallest singular
    value of ``s F - G``, which is scale free, rather than ``|det|``.
    """
    m = pencil.m
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal(m + 1) + 1j * rng.standard_normal(m + 1)
    if tol is None:
        tol = 100.0 * m * EPS
    dets = np.empty(m + 1)
    rel = np.empty(m + 1)
    for i, s in enumerate(pts):
        M = s * pencil.F - pencil.G
        sv = np.linalg.svd(M, compute_uv=False)
        dets[i] = float(np.prod(sv))
        rel[i] = sv[-1] / sv[0] if sv[0] > 0 else 0.0
    return RegularityVerdict(bool(np.any(rel > tol)), pts, dets, rel, float(tol))


def _orth(A: np.ndarray, tol: float) -> np.ndarray:
    if A.shape[1] == 0:
        return A
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    return U[:, s > tol]


def _null(A: np.ndarray, tol: float) -> np.ndarray:
    _, s, Vh = np.linalg.svd(A)
    r = int(np.count_nonzero(s > tol))
    return Vh[r:].conj().T


def infinite_multiplicity(pencil: MatrixPencil, rank_tol: float = 1e-9) -> int:
    """Dimension of the infinite deflating subspace via the Wong sequence.

    ``W_0 = {0}``, ``W_{i+1} = {x : F x in G W_i}``; the limit has
    dimension ``q``. ``rank_tol`` is relative to ``max(||F||, ||G||)``.
    """
    F, G, m = pencil.F, pencil.G, pencil.m
    tol = rank_tol * _pencil_scale(pencil)
    W = np.zeros((m, 0), dtype=complex)
    for _ in range(m + 1):
        B = _orth(G @ W, tol)
        A = F - B @ (B.conj().T @ F)
        W_next = _null(A, tol)
        if W_next.shape[1] <= W.shape[1]:
            break
        W = W_next
    return W.shape[1]


def nilpotency_index(H: np.ndarray, tol: float = 1e-10) -> int:
    """Smallest ``k`` with ``||H^k|| <= tol * (1 + ||H||^k)``; 0 for empty ``H``."""
    n = H.shape[0]
    if n == 0:
        return 0
    nrm = spectral_norm(H)
    Hk = np.eye(n, dtype=complex)
    for k in range(1, n + 2):
        Hk = Hk @ H
        if spectral_norm(Hk) <= tol * (1.0 + nrm**k):
            return k
    raise DefectiveError(f"H is not nilpotent to tolerance {tol}")


def _staircase(H: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Unitary ``U`` with ``U^* H U`` block strictly upper triangular.

    Each step moves an orthonormal kernel basis of the trailing block to the
    front and drops the roundoff left in those columns, so the returned
    matrix is nilpotent by structure. Raises :class:`DefectiveError` if a
    trailing block has no numerical kernel.
    """
    n = H.shape[0]
    H = H.astype(complex).copy()
    U = np.eye(n, dtype=complex)
    off = 0
    while off < n:
        blk = H[off:, off:]
        _, s, Vh = np.linalg.svd(blk)
        r = int(np.count_nonzero(s > tol))
        d = blk.shape[0] - r
        if d == 0:
            raise DefectiveError(f"infinite block is not nilpotent (smallest singular value {s[-1]:.3g})")
        # null directions first
        V = np.vstack([Vh[r:], Vh[:r]]).conj().T
        H[:, off:] = H[:, off:] @ V
        H[off:, :] = V.conj().T @ H[off:, :]
        U[:, off:] = U[:, off:] @ V
        H[off:, off:off + d] = 0.0
        off += d
    return U, H


def _sort_key(lam: complex, digits: int = 9):
    # quantized so that +-lambda pairs of equal modulus order stably
    return (-round(abs(lam), digits), -round(lam.real, digits), -round(lam.imag, digits))


def canonical_order(values) -> list[int]:
    """Indices sorting eigenvalues by descending modulus, real part, imaginary part."""
    return sorted(range(len(values)), key=lambda i: _sort_key(complex(values[i])))


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage grouping of eigenvalues closer than ``tol``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _jordan_chains(N: np.ndarray, tol: float) -> list[list[np.ndarray]]:
    """Jordan chains of an (approximately) nilpotent matrix ``N``.

    Returns chains as lists ``[x_1, ..., x_l]`` with ``N x_1 ~ 0`` and
    ``N x_{i+1} = x_i``. Kernel dimensions of ``N^j`` are rank-revealed with
    threshold ``tol * max(1, ||N||)^(j-1)``.
    """
    k = N.shape[0]
    nrm = max(1.0, spectral_norm(N))
    kernels = [np.zeros((k, 0), dtype=complex)]
    Nj = np.eye(k, dtype=complex)
    for j in range(1, k + 1):
        Nj = Nj @ N
        kernels.append(_null(Nj, tol * nrm ** (j - 1)))
        if kernels[-1].shape[1] == k:
            break
    depth = len(kernels) - 1
    if kernels[-1].shape[1] != k:
        raise DefectiveError("cluster is not nilpotent after shifting")

    tops: list[tuple[int, np.ndarray]] = []
    for j in range(depth, 0, -1):
        needed = kernels[j].shape[1] - kernels[j - 1].shape[1]
        # vectors already present at level j from longer chains
        carried = [np.linalg.matrix_power(N, lvl - j) @ v for lvl, v in tops]
        have = len(carried)
        new = needed - have
        if new <= 0:
            continue
        S = np.hstack([kernels[j - 1]] + [c.reshape(-1, 1) for c in carried]) if (
            kernels[j - 1].shape[1] or carried) else np.zeros((k, 0), dtype=complex)
        if S.shape[1]:
            Sq, _ = np.linalg.qr(S)
            Wp = kernels[j] - Sq @ (Sq.conj().T @ kernels[j])
        else:
            Wp = kernels[j]
        U, _, _ = np.linalg.svd(Wp, full_matrices=False)
        for c in range(new):
            tops.append((j, U[:, c]))

    chains = []
    for lvl, v in tops:
        chain = [v]
        for _ in range(lvl - 1):
            chain.append(N @ chain[-1])
        chains.append(chain[::-1])
    return chains


def _reorder_schur(T: np.ndarray, U: np.ndarray, target: list[int]):
    """Move diagonal entries of triangular ``T`` so ``target[i]`` lands at position ``i``."""
    pos = list(range(T.shape[0]))
    for dest, ident in enumerate(target):
        cur = pos.index(ident)
        if cur != dest:
            T, U, info = lapack.ztrexc(T, U, cur + 1, dest + 1)
            if info != 0:
                raise DefectiveError(f"ztrexc failed (info={info})")
            pos.insert(dest, pos.pop(cur))
    return T, U


def _decouple(T: np.ndarray, sizes: list[int], split_bound: float):
    """Block-diagonalize triangular ``T`` along ``sizes``.

    Returns ``(T, S)`` with ``S^{-1} T_in S = T`` block diagonal, or
    ``(None, k)`` when splitting off block ``k`` needs a coupling solution
    with norm above ``split_bound`` (the blocks are then too close to
    separate stably).
    """
    p = T.shape[0]
    S_all = np.eye(p, dtype=complex)
    off = 0
    for k, sz in enumerate(sizes[:-1]):
        a = T[off:off + sz, off:off + sz]
        b = T[off + sz:, off + sz:]
        c = -T[off:off + sz, off + sz:]
        X, scale, info = lapack.ztrsyl(a, b, c, isgn=-1)
        if info < 0:
            raise DefectiveError(f"ztrsyl failed (info={info})")
        X = X / scale
        if info > 0 or not np.all(np.isfinite(X)) or spectral_norm(X) > split_bound:
            return None, k
        S = np.eye(p, dtype=complex)
        S[off:off + sz, off + sz:] = X
        Sinv = np.eye(p, dtype=complex)
        Sinv[off:off + sz, off + sz:] = -X
        T = Sinv @ T @ S
        S_all = S_all @ S
        off += sz
    return T, S_all


def _jordan_reduce(M: np.ndarray, cluster_tol: float, max_cond: float, split_bound: float = 1e4):
    """Return ``(W, J, eigs, spans)`` with ``M W = W J`` and ``J`` in Jordan form.

    ``M`` must be upper triangular. Eigenvalues within ``cluster_tol`` are
    grouped; groups whose separation would need a coupling larger than
    ``split_bound`` are merged (a defective eigenvalue perturbed by roundoff
    splits by ``sqrt(eps)`` or more, far beyond any fixed distance
    threshold). ``eigs`` lists ``(value, multiplicity)`` in canonical order
    and ``spans`` gives the column range of each Jordan block.
    """
    p = M.shape[0]
    d = np.diag(M).copy()
    groups = _cluster(d, cluster_tol)
    while True:
        reps = [complex(np.mean(d[g])) for g in groups]
        groups = [groups[i] for i in canonical_order(reps)]
        target = [i for g in groups for i in g]
        T, U = _reorder_schur(M.astype(complex), np.eye(p, dtype=complex), target)
        sizes = [len(g) for g in groups]
        T, S_all = _decouple(T, sizes, split_bound)
        if T is not None:
            break
        k = S_all
        lead = groups[k]
        dist = [min(abs(d[i] - d[j]) for i in lead for j in g) for g in groups[k + 1:]]
        nearest = k + 1 + int(np.argmin(dist))
        groups = [g for i, g in enumerate(groups) if i not in (k, nearest)] + [lead + groups[nearest]]

    W_blocks = []
    J = np.zeros((p, p), dtype=complex)
    eigs = []
    spans = []
    off = 0
    for g, sz in zip(groups, sizes):
        Tc = T[off:off + sz, off:off + sz]
        lam = complex(np.trace(Tc) / sz)
        if sz == 1:
            Wc = np.ones((1, 1), dtype=complex)
            chain_lens = [1]
        else:
            chains = _jordan_chains(Tc - lam * np.eye(sz), cluster_tol)
            chains.sort(key=len, reverse=True)
            Wc = np.column_stack([v for ch in chains for v in ch])
            chain_lens = [len(ch) for ch in chains]
        W_blocks.append(Wc)
        c0 = off
        for ln in chain_lens:
            for i in range(ln):
                J[c0 + i, c0 + i] = lam
                if i:
                    J[c0 + i - 1, c0 + i] = 1.0
            spans.append((c0, c0 + ln))
            c0 += ln
        eigs.append((lam, sz))
        off += sz

    W = U @ S_all @ sla.block_diag(*W_blocks) if p else np.zeros((0, 0), dtype=complex)
    if p:
        cond = np.linalg.cond(W)
        if not np.isfinite(cond) or cond > max_cond:
            bad = max(range(len(groups)), key=lambda i: sizes[i])
            raise DefectiveError(
                f"Jordan basis condition number {cond:.3g} exceeds {max_cond:.3g}",
                cluster=[d[i] for i in groups[bad]],
            )
    return W, J, eigs, spans


def _normalize_chains(Qp: np.ndarray, spans, tol: float = 1e-12):
    """Per-chain scale factors making each eigenvector unit norm with a real positive lead."""
    scale = np.ones(Qp.shape[1], dtype=complex)
    for a, b in spans:
        v = Qp[:, a]
        nrm = np.linalg.norm(v)
        if nrm == 0:
            continue
        big = np.flatnonzero(np.abs(v) > tol * nrm)
        phase = v[big[0]] / abs(v[big[0]])
        scale[a:b] = 1.0 / (nrm * phase)
    return scale


def weierstrass_decompose(
    pencil: MatrixPencil,
    *,
    rank_tol: float = 1e-9,
    cluster_tol: float = 1e-6,
    max_cond: float = 1e8,
    seed: int = 0,
) -> tuple[WeierstrassForm, PencilPartition]:
    """Numerical Weierstrass canonical form of a regular pencil.

    Parameters
    ----------
    pencil : MatrixPencil
    rank_tol : float
        Relative threshold for the rank decisions counting infinite
        eigenvalues.
    cluster_tol : float
        Finite eigenvalues closer than ``cluster_tol * max(1, rho)`` (``rho``
        the spectral radius of the finite part) share a Jordan cluster.
    max_cond : float
        Largest acceptable condition number of the Jordan basis.
    seed : int
        Seed for the regularity probe.

    Returns
    -------
    (WeierstrassForm, PencilPartition)

    Raises
    ------
    SingularPencilError
        If the pencil is singular.
    DefectiveError
        If a Jordan basis cannot be built stably.
    """
    verdict = is_regular(pencil, seed)
    if not verdict.regular:
        raise SingularPencilError("singular pencil: det(sF - G) vanishes identically")
    F, G, m = pencil.F, pencil.G, pencil.m
    q = infinite_multiplicity(pencil, rank_tol)
    p = m - q

    def select(alpha, beta):
        chi = np.abs(beta) / np.maximum(np.hypot(np.abs(alpha), np.abs(beta)), np.finfo(float).tiny)
        mask = np.zeros(len(alpha), dtype=bool)
        mask[np.argsort(-chi, kind="stable")[:p]] = True
        return mask

    AA, BB, _, _, Qz, Z = sla.ordqz(G, F, sort=select, output="complex")
    A11, A12, A22 = AA[:p, :p], AA[:p, p:], AA[p:, p:]
    B11, B12, B22 = BB[:p, :p], BB[:p, p:], BB[p:, p:]

    # X A22 - (A11 B11^{-1}) X B22 = -A12 + A11 B11^{-1} B12, then Y from the F-equation
    if p and q:
        R = sla.solve_triangular(B11.T, A11.T, lower=True).T
        rhs = -A12 + R @ B12
        kron = np.kron(A22.T, np.eye(p)) - np.kron(B22.T, R)
        X = np.linalg.solve(kron, rhs.reshape(-1, order="F")).reshape((p, q), order="F")
        Y = -sla.solve_triangular(B11, B12 + X @ B22)
    else:
        X = np.zeros((p, q), dtype=complex)
        Y = np.zeros((p, q), dtype=complex)

    if p:
        M = sla.solve_triangular(B11, A11)
        M = np.triu(M)
        rho = float(np.max(np.abs(np.diag(M))))
        W, Jp, eigs, spans = _jordan_reduce(M, cluster_tol * max(1.0, rho), max_cond)
    else:
        W = np.zeros((0, 0), dtype=complex)
        Jp = np.zeros((0, 0), dtype=complex)
        eigs, spans = [], []
    if q:
        Hq = np.triu(sla.solve_triangular(A22, B22))
        Us, Hq = _staircase(Hq, rank_tol * max(1.0, spectral_norm(Hq)))
    else:
        Hq = np.zeros((0, 0), dtype=complex)
        Us = Hq

    Tl = np.eye(m, dtype=complex)
    Tl[:p, p:] = X
    Tr = np.eye(m, dtype=complex)
    Tr[:p, p:] = Y
    left = np.zeros((m, m), dtype=complex)
    if p:
        left[:p, :p] = np.linalg.solve(W, sla.solve_triangular(B11, np.eye(p)))
    if q:
        left[p:, p:] = Us.conj().T @ sla.solve_triangular(A22, np.eye(q))
    P = left @ Tl @ Qz.conj().T
    Q = Z @ Tr @ sla.block_diag(W, Us)

    if p:
        scale = _normalize_chains(Q[:, :p], spans)
        Q[:, :p] = Q[:, :p] * scale
        P[:p, :] = P[:p, :] / scale[:, None]

    form = WeierstrassForm(
        P=P, Q=Q, Jp=Jp, Hq=Hq, p=p, q=q,
        q_star=nilpotency_index(Hq), finite_eigenvalues=eigs,
    )
    return form, PencilPartition.from_form(form)


def _eigs_from_jordan(Jp: np.ndarray, tol: float = 1e-12):
    d = np.diag(Jp)
    groups = _cluster(d, tol * max(1.0, float(np.max(np.abs(d))) if d.size else 1.0))
    reps = [complex(np.mean(d[g])) for g in groups]
    return [(reps[i], len(groups[i])) for i in canonical_order(reps)]


def inject_form(Qp, Jp, P=None, Q=None, Hq=None) -> tuple[WeierstrassForm, PencilPartition]:
    """Build a form from externally supplied blocks, bypassing decomposition.

    Only ``Qp`` and ``Jp`` are required. When ``P`` and ``Q`` are given,
    ``Qp`` must equal the first ``p`` columns of ``Q``.
    """
    Qp = as_matrix(Qp, "Qp")
    Jp = as_matrix(Jp, "Jp")
    p = Jp.shape[0]
    if Jp.shape != (p, p):
        raise ValueError(f"Jp must be square, got {Jp.shape}")
    if Qp.shape[1] != p:
        raise ValueError(f"Qp has {Qp.shape[1]} columns, Jp is {p}x{p}")
    m = Qp.shape[0]
    q = m - p
    if q < 0:
        raise ValueError("Qp has more columns than rows")
    if Hq is not None:
        Hq = as_matrix(Hq, "Hq")
        if Hq.shape != (q, q):
            raise ValueError(f"Hq must be {q}x{q}, got {Hq.shape}")
    P = None if P is None else as_matrix(P, "P")
    Q = None if Q is None else as_matrix(Q, "Q")
    if (P is None) != (Q is None):
        raise ValueError("P and Q must be supplied together")
    if Q is not None:
        if P.shape != (m, m) or Q.shape != (m, m):
            raise ValueError(f"P and Q must be {m}x{m}")
        if not np.array_equal(Q[:, :p], Qp):
            raise ValueError("Qp does not match the leading columns of Q")
    q_star = nilpotency_index(Hq) if Hq is not None else 0
    form = WeierstrassForm(P=P, Q=Q, Jp=Jp, Hq=Hq, p=p, q=q, q_star=q_star,
                           finite_eigenvalues=_eigs_from_jordan(Jp))
    if Q is not None:
        return form, PencilPartition.from_form(form)
    return form, PencilPartition(Qp=Qp)


def verify_wcf(pencil: MatrixPencil, form: WeierstrassForm) -> tuple[float, float]:
    """Residuals ``||PFQ - diag(I, Hq)||_2`` and ``||PGQ - diag(Jp, I)||_2``."""
    if form.P is None or form.Q is None or form.Hq is None:
        raise ValueError("form lacks P, Q or Hq; use verify_finite_part")
    m = pencil.m
    if form.P.shape != (m, m) or form.Q.shape != (m, m) or form.p + form.q != m:
        raise ValueError(f"form dimensions do not match a {m}x{m} pencil")
    p, q = form.p, form.q
    eF = form.P @ pencil.F @ form.Q - sla.block_diag(np.eye(p), form.Hq)
    eG = form.P @ pencil.G @ form.Q - sla.block_diag(form.Jp, np.eye(q))
    return spectral_norm(eF), spectral_norm(eG)


def verify_finite_part(pencil: MatrixPencil, Qp: np.ndarray, Jp: np.ndarray) -> float:
    """``||F Qp Jp - G Qp||_2``: zero iff the columns span a finite deflating subspace with dynamics ``Jp``."""
    if Qp.shape[0] != pencil.m or Qp.shape[1] != Jp.shape[0]:
        raise ValueError("Qp/Jp dimensions do not match the pencil")
    return spectral_norm(pencil.F @ Qp @ Jp - pencil.G @ Qp)
