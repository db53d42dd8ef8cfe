"""Coefficient search as a shortest-vector problem.

The quadratic form f(a) = sum_j sigma_j(a)^T M_j sigma_j(a) over ring
coefficient vectors equals ||Bbar atilde||^2 on an explicit integer lattice,
built from the per-block Cholesky factors and the field embedding matrix.
The SVP is solved exactly by Schnorr-Euchner enumeration after LLL
preprocessing; a brute-force box search is kept as an independent oracle.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import BlockFadingChannel, EquationCandidate, am_rate, gram_matrix
from .numfield import NumberField, RingElement

__all__ = [
    "RankDeficient",
    "TooLarge",
    "CholeskyFailure",
    "SearchBasis",
    "SVPResult",
    "build_search_basis",
    "shortest_vector",
    "brute_force_shortest",
    "best_equation",
    "best_integer_block",
    "minkowski_bound",
    "enumerate_short_vectors",
    "top_equations",
]

LLL_DELTA = 0.99
_REL_TIE = 1e-9


class RankDeficient(ValueError):
    """Basis does not have full column rank."""


class TooLarge(ValueError):
    """Brute-force search box is empty or too large to enumerate."""


class CholeskyFailure(ArithmeticError):
    """A block Gram matrix is not numerically positive definite."""


def _cholesky_upper(M: np.ndarray, jitter: float = 1e-12) -> np.ndarray:
    """Upper factor R with M = R^T R.  M is positive definite by construction
    (identity minus a contraction), but huge SNR can push it to the edge of
    semidefiniteness; one shot of jitter is allowed, then we fail hard rather
    than silently regularize."""
    try:
        return np.linalg.cholesky(M).T
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(M + jitter * np.eye(len(M))).T
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure("block Gram matrix is not positive definite") from exc


@dataclass(frozen=True)
class SearchBasis:
    """Generator matrix Bbar of the coefficient-search lattice.

    Columns are the lattice generators, indexed by the interleaved ring
    coordinates of a (user-major): ||basis @ atilde||^2 = f(a).  For plain
    integer coefficients (field=None) the basis is the nL x L stack of the
    per-block Cholesky factors.
    """

    dim: int
    basis: np.ndarray
    phi_mix: np.ndarray | None = None
    cholesky: tuple | None = None
    row_shuffle: np.ndarray | None = None
    field: NumberField | None = None
    channel: BlockFadingChannel | None = None


@dataclass(frozen=True)
class SVPResult:
    coords: np.ndarray  # nonzero integer vector atilde
    norm_sq: float
    node_count: int


def build_search_basis(
    field: NumberField | None, ch: BlockFadingChannel
) -> SearchBasis:
    """Assemble Bbar = M_mix Phi_mix for the channel's Gram matrices.

    Rows are grouped by fading block, one row per user; user l's column pair
    carries (sigma_j(1), sigma_j(theta)).  The row shuffle records the
    permutation from the user-major Kronecker layout.
    """
    n, L = ch.n, ch.L
    deg = field.degree if field is not None else 1
    if field is not None and n != field.degree:
        raise ValueError(f"field degree {field.degree} != block count {n}")
    phi_mix = np.zeros((n * L, L * deg))
    for j in range(n):
        for l in range(L):
            if field is not None:
                phi_mix[j * L + l, l * deg : (l + 1) * deg] = field.embedding[j]
            else:
                phi_mix[j * L + l, l] = 1.0
    chol = []
    bbar = np.empty_like(phi_mix)
    for j in range(n):
        R = _cholesky_upper(gram_matrix(ch.h[j], ch.P))
        chol.append(R)
        bbar[j * L : (j + 1) * L] = R @ phi_mix[j * L : (j + 1) * L]
    shuffle = None
    if field is not None:
        # row r = j*L + l of Phi_mix is row l*deg + j of I_L (x) Phi
        shuffle = np.array([(r % L) * deg + r // L for r in range(n * L)])
    return SearchBasis(
        dim=L * deg,
        basis=bbar,
        phi_mix=phi_mix,
        cholesky=tuple(chol),
        row_shuffle=shuffle,
        field=field,
        channel=ch,
    )


def _dot(x, y):
    return sum(a * b for a, b in zip(x, y))


def _lll_reduce(rows, delta=LLL_DELTA):
    """Floating-point LLL on a list of basis row vectors.

    Returns (reduced, transform) with reduced[i] = sum_k transform[i][k]*rows[k]
    and transform unimodular.
    """
    m = len(rows)
    b = [[float(x) for x in r] for r in rows]
    T = [[1 if i == k else 0 for k in range(m)] for i in range(m)]

    def gso():
        mu = [[0.0] * m for _ in range(m)]
        norms = [0.0] * m
        star = []
        for i in range(m):
            v = b[i][:]
            for j in range(i):
                if norms[j] <= 0.0:
                    raise RankDeficient("basis is numerically rank deficient")
                mu[i][j] = _dot(b[i], star[j]) / norms[j]
                v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
            star.append(v)
            norms[i] = _dot(v, v)
        return mu, norms

    mu, norms = gso()
    k = 1
    while k < m:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                T[k] = [x - q * y for x, y in zip(T[k], T[j])]
                for jj in range(j):
                    mu[k][jj] -= q * mu[j][jj]
                mu[k][j] -= q
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            T[k], T[k - 1] = T[k - 1], T[k]
            mu, norms = gso()
            k = max(k - 1, 1)
    return b, T


def _enumerate(R, bound_sq, shrink=True, rel_tol=_REL_TIE):
    """Schnorr-Euchner enumeration over an upper-triangular factor R.

    Finds nonzero integer vectors z with ||R z||^2 <= bound (the zero vector is
    never emitted).  With shrink=True the bound tightens as better vectors are
    found and all candidates tied with the minimum (relative rel_tol) are
    collected; with shrink=False every vector inside the fixed radius is
    returned.  Returns (candidates, node_count) with candidates as
    (dist, z list) pairs.
    """
    k = len(R)
    best = float(bound_sq)
    limit = best * (1.0 + rel_tol)
    cands = []
    z = [0] * k
    center = [0.0] * k
    step = [0] * k
    partial = [0.0] * (k + 1)
    i = k - 1
    center[i] = 0.0
    z[i] = 0
    step[i] = 1
    nodes = 0
    while True:
        nodes += 1
        w = (z[i] - center[i]) * R[i][i]
        d = partial[i + 1] + w * w
        if d <= limit:
            if i == 0:
                if any(z):
                    if shrink and d < best * (1.0 - 1e-12):
                        best = d
                        limit = best * (1.0 + rel_tol)
                        cands = [(d, z.copy())]
                    else:
                        cands.append((d, z.copy()))
                z[0] += step[0]
                step[0] = -step[0] - (1 if step[0] >= 0 else -1)
            else:
                partial[i] = d
                i -= 1
                c = -sum(R[i][j] * z[j] for j in range(i + 1, k)) / R[i][i]
                center[i] = c
                z[i] = round(c)
                step[i] = 1 if c - z[i] >= 0 else -1
        else:
            i += 1
            if i == k:
                break
            z[i] += step[i]
            step[i] = -step[i] - (1 if step[i] >= 0 else -1)
    if shrink:
        cands = [(d, zz) for d, zz in cands if d <= best * (1.0 + rel_tol)]
    return cands, nodes


def _triangular_factor(columns: np.ndarray) -> np.ndarray:
    """QR upper factor with positive diagonal; raises on rank deficiency."""
    _, R = np.linalg.qr(columns)
    signs = np.sign(np.diag(R))
    scale = float(np.max(np.abs(np.diag(R))))
    if scale <= 0 or np.any(np.abs(np.diag(R)) < 1e-12 * scale):
        raise RankDeficient("basis is numerically rank deficient")
    return (R.T * np.where(signs == 0, 1.0, signs)).T


def _normalize_sign(a: tuple) -> tuple:
    for x in a:
        if x != 0:
            return a if x > 0 else tuple(-y for y in a)
    return a


def _pick_candidate(basis: np.ndarray, coord_set) -> tuple[tuple, float]:
    """Deterministic tie-break: smallest norm, then the lexicographically
    smallest sign-normalized coordinate vector."""
    scored = []
    for a in coord_set:
        v = basis @ np.array(a, dtype=float)
        scored.append((float(v @ v), a))
    nmin = min(s for s, _ in scored)
    tied = [a for s, a in scored if s <= nmin * (1.0 + _REL_TIE)]
    a_best = min(tied)
    v = basis @ np.array(a_best, dtype=float)
    return a_best, float(v @ v)


def shortest_vector(B: SearchBasis) -> SVPResult:
    """Exact SVP on the search basis: LLL then full Schnorr-Euchner
    enumeration with initial radius equal to the shortest LLL vector."""
    basis = np.asarray(B.basis, dtype=float)
    reduced, T = _lll_reduce(list(basis.T))
    R = _triangular_factor(np.array(reduced).T)
    bound = min(_dot(v, v) for v in reduced)
    cands, nodes = _enumerate([list(r) for r in R], bound, shrink=True)
    if not cands:
        raise RankDeficient("enumeration found no lattice vector")
    coord_set = {
        _normalize_sign(tuple(int(_dot(zz, col)) for col in zip(*T)))
        for _, zz in cands
    }
    a, norm_sq = _pick_candidate(basis, coord_set)
    return SVPResult(coords=np.array(a, dtype=np.int64), norm_sq=norm_sq, node_count=nodes)


def enumerate_short_vectors(B: SearchBasis, radius_sq: float) -> list[SVPResult]:
    """All sign-normalized nonzero lattice vectors with ||Bbar atilde||^2 <=
    radius_sq, sorted by norm then coordinates."""
    basis = np.asarray(B.basis, dtype=float)
    reduced, T = _lll_reduce(list(basis.T))
    R = _triangular_factor(np.array(reduced).T)
    cands, nodes = _enumerate([list(r) for r in R], radius_sq, shrink=False)
    seen = {}
    for _, zz in cands:
        a = _normalize_sign(tuple(int(_dot(zz, col)) for col in zip(*T)))
        if a not in seen:
            v = basis @ np.array(a, dtype=float)
            seen[a] = float(v @ v)
    out = [
        SVPResult(coords=np.array(a, dtype=np.int64), norm_sq=s, node_count=nodes)
        for a, s in seen.items()
        if s <= radius_sq * (1.0 + _REL_TIE)
    ]
    out.sort(key=lambda r: (r.norm_sq, tuple(r.coords)))
    return out


def brute_force_shortest(B: SearchBasis, bound: int) -> SVPResult:
    """Independent oracle: exhaustive search over the integer box
    ||atilde||_inf <= bound."""
    if bound < 1:
        raise TooLarge("search box is empty (bound must be >= 1)")
    basis = np.asarray(B.basis, dtype=float)
    k = basis.shape[1]
    count = (2 * bound + 1) ** k
    if count > 10**8:
        raise TooLarge(f"box of {count} points exceeds the enumeration budget")
    axes = [np.arange(-bound, bound + 1)] * k
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    vecs = grid @ basis.T
    norms = np.einsum("ij,ij->i", vecs, vecs)
    nonzero = np.any(grid != 0, axis=1)
    nmin = norms[nonzero].min()
    tied = grid[nonzero & (norms <= nmin * (1.0 + _REL_TIE))]
    coord_set = {_normalize_sign(tuple(int(x) for x in row)) for row in tied}
    a, norm_sq = _pick_candidate(basis, coord_set)
    return SVPResult(
        coords=np.array(a, dtype=np.int64), norm_sq=norm_sq, node_count=count - 1
    )


def minkowski_bound(B: SearchBasis) -> float:
    """sqrt(dim) |det|^(1/dim) upper bound on the first successive minimum,
    via the Gram determinant so non-square bases work too."""
    basis = np.asarray(B.basis, dtype=float)
    k = basis.shape[1]
    g = float(np.linalg.det(basis.T @ basis))
    if g <= 0:
        raise RankDeficient("basis is numerically rank deficient")
    return math.sqrt(k) * g ** (1.0 / (2 * k))


def _coords_to_coefficients(field: NumberField | None, coords, L: int) -> tuple:
    if field is None:
        return tuple(int(x) for x in coords)
    deg = field.degree
    return tuple(
        RingElement(int(coords[l * deg]), int(coords[l * deg + 1])) for l in range(L)
    )


def best_equation(
    field: NumberField | None, ch: BlockFadingChannel
) -> EquationCandidate:
    """Rate-optimal coefficient vector over the ring (field=None: over Z,
    searching the Gram sum_j M_j instead)."""
    B = build_search_basis(field, ch)
    res = shortest_vector(B)
    a = _coords_to_coefficients(field, res.coords, ch.L)
    return am_rate(ch, a, field)


def best_integer_block(h_j, P: float) -> tuple[tuple, float]:
    """Exact minimizer of a^T M a over nonzero integer vectors for one block."""
    R = _cholesky_upper(gram_matrix(h_j, P))
    res = shortest_vector(SearchBasis(dim=R.shape[1], basis=R))
    return tuple(int(x) for x in res.coords), res.norm_sq


def _int_rank(vectors: list[tuple]) -> int:
    rows = [[Fraction(x) for x in v] for v in vectors]
    rank = 0
    col = 0
    width = len(rows[0]) if rows else 0
    while rank < len(rows) and col < width:
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(rank + 1, len(rows)):
            if rows[r][col] != 0:
                factor = rows[r][col] / rows[rank][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def top_equations(
    field: NumberField | None,
    ch: BlockFadingChannel,
    count: int,
    slack: float = 1.5,
) -> list[EquationCandidate]:
    """Greedy list of up to `count` linearly independent candidates, by
    ascending quadratic form, from the vectors within slack * lambda_1."""
    B = build_search_basis(field, ch)
    first = shortest_vector(B)
    grow = slack
    picked: list[SVPResult] = []
    while grow <= 4.0 * slack:
        short = enumerate_short_vectors(B, grow * grow * first.norm_sq)
        picked = []
        for res in short:
            trial = [tuple(r.coords) for r in picked] + [tuple(res.coords)]
            if _int_rank(trial) == len(trial):
                picked.append(res)
            if len(picked) == count:
                break
        if len(picked) == count:
            break
        grow *= 2.0
    return [
        am_rate(ch, _coords_to_coefficients(field, r.coords, ch.L), field)
        for r in picked
    ]


def scaled_basis(B: SearchBasis, s: float) -> SearchBasis:
    """The search basis with every Cholesky factor multiplied by s > 0."""
    return dataclasses.replace(
        B,
        basis=s * B.basis,
        cholesky=None if B.cholesky is None else tuple(s * c for c in B.cholesky),
    )
