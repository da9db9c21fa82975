"""Perfect-matching counts and the matching-theoretic bounds on d_T.

The permanent is computed with Ryser's inclusion-exclusion formula, visiting
column subsets in Gray-code order so that each step updates the running row
sums by a single column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hypergraph import (
    BiadjacencyMatrix,
    Hypergraph,
    HypergraphError,
    VertexTriple,
    all_triples,
    delete_vertices,
    incidence_matrix,
)

__all__ = [
    "MAX_PERMANENT_SIZE",
    "MAX_ENUMERATION_SIZE",
    "BoundReport",
    "permanent",
    "enumerate_perfect_matchings",
    "labeled_matchings",
    "matching_bound",
    "min_matching_bound",
    "surplus",
    "hall_criterion",
    "bregman_minc",
    "uniform_bounds",
]

MAX_PERMANENT_SIZE = 30
MAX_ENUMERATION_SIZE = 12
# Vectorized route materializes a (2**k, k) table; above this size fall back.
_NUMPY_MAX_SIZE = 16
_INT64_LIMIT = 1 << 62


def _as_square_01(m) -> np.ndarray:
    if isinstance(m, BiadjacencyMatrix):
        m = m.entries
    a = np.asarray(m, dtype=np.int64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError("matrix entries must be 0 or 1")
    return a


def permanent(m, *, method: str = "auto") -> int:
    """Exact permanent of a square 0/1 matrix of side at most 30.

    ``method`` selects the ``"python"`` Gray-code loop (arbitrary-precision
    ints), the ``"numpy"`` vectorized Gray-code sweep, or ``"auto"``, which
    uses numpy only when the int64 accumulator provably cannot overflow.
    """
    a = _as_square_01(m)
    k = a.shape[0]
    if k > MAX_PERMANENT_SIZE:
        raise ValueError(f"matrix side {k} exceeds the permanent guard of {MAX_PERMANENT_SIZE}")
    if k == 0:
        return 1
    row_sums = a.sum(axis=1)
    if not row_sums.all() or not a.sum(axis=0).all():
        return 0
    if method == "auto":
        # every Ryser term is bounded by prod(row_sums); there are 2**k terms
        safe = k <= _NUMPY_MAX_SIZE and math.prod(int(r) for r in row_sums) << k < _INT64_LIMIT
        method = "numpy" if safe else "python"
    if method == "numpy":
        return _ryser_numpy(a)
    if method == "python":
        return _ryser_python(a.tolist())
    raise ValueError(f"unknown method {method!r}")


def _ryser_python(rows: list[list[int]]) -> int:
    k = len(rows)
    cols = [[rows[r][c] for r in range(k)] for c in range(k)]
    sums = [0] * k
    total = 0
    gray = 0
    for i in range(1, 1 << k):
        j = (i & -i).bit_length() - 1  # bit that flips between gray(i-1) and gray(i)
        gray ^= 1 << j
        col = cols[j]
        if gray >> j & 1:
            for r in range(k):
                sums[r] += col[r]
        else:
            for r in range(k):
                sums[r] -= col[r]
        prod = 1
        for s in sums:
            if not s:
                prod = 0
                break
            prod *= s
        if prod:
            total += -prod if bin(gray).count("1") & 1 else prod
    return total if k % 2 == 0 else -total


def _ryser_numpy(a: np.ndarray) -> int:
    k = a.shape[0]
    idx = np.arange(1, 1 << k, dtype=np.int64)
    flip = np.zeros_like(idx)
    low = idx & -idx
    for j in range(k):
        flip[low == (1 << j)] = j
    gray = idx ^ (idx >> 1)
    added = (gray >> flip) & 1
    deltas = a.T[flip] * (2 * added - 1)[:, None]
    sums = np.cumsum(deltas, axis=0)
    terms = np.prod(sums, axis=1)
    parity = np.bitwise_count(gray.astype(np.uint64)) & 1
    total = int(np.where(parity == 1, -terms, terms).sum())
    return total if k % 2 == 0 else -total


def enumerate_perfect_matchings(m) -> list[tuple[int, ...]]:
    """All perfect matchings as column-index tuples (0-based), one entry per row.

    Results come in lexicographic order of the column sequence.
    """
    a = _as_square_01(m)
    k = a.shape[0]
    if k > MAX_ENUMERATION_SIZE:
        raise ValueError(f"matrix side {k} exceeds the enumeration guard of {MAX_ENUMERATION_SIZE}")
    options = [[c for c in range(k) if a[r, c]] for r in range(k)]
    out: list[tuple[int, ...]] = []
    chosen: list[int] = []

    def extend(r: int, used: int) -> None:
        if r == k:
            out.append(tuple(chosen))
            return
        for c in options[r]:
            if not used >> c & 1:
                chosen.append(c)
                extend(r + 1, used | 1 << c)
                chosen.pop()

    extend(0, 0)
    return out


def labeled_matchings(b: BiadjacencyMatrix) -> list[dict[int, int]]:
    """Perfect matchings of ``b`` as ``{edge index: vertex label}`` maps."""
    return [
        {b.rows[r]: b.cols[c] for r, c in enumerate(match)}
        for match in enumerate_perfect_matchings(b.entries)
    ]


def _reduced_matrix(h: Hypergraph, t: Sequence[int]) -> BiadjacencyMatrix:
    if not h.is_balanced():
        raise HypergraphError(
            f"matching bound needs a balanced hypergraph ({h.num_edges} edges, n={h.n})"
        )
    t = VertexTriple.of(*t, n=h.n)
    return delete_vertices(incidence_matrix(h), t)


def matching_bound(h: Hypergraph, t: Sequence[int]) -> int:
    """Number of perfect matchings of the incidence graph with ``t`` deleted."""
    return permanent(_reduced_matrix(h, t).entries)


def bregman_minc(h: Hypergraph, t: Sequence[int]) -> float:
    """Bregman-Minc bound: product over edges of ``(d!)**(1/d)``, ``d = |e - t|``."""
    drop = set(t)
    value = 1.0
    for e in h.edges:
        d = sum(v not in drop for v in e)
        if d == 0:
            return 0.0
        value *= math.factorial(d) ** (1.0 / d)
    return value


def uniform_bounds(n: int) -> tuple[float, int]:
    """``(24**((n-3)/4), 2**(n-4))``, both upper bounds on d_T for any T on n vertices."""
    if n < 4:
        raise ValueError(f"uniform bounds need n >= 4, got {n}")
    return 24.0 ** ((n - 3) / 4), 2 ** (n - 4)


def surplus(h: Hypergraph) -> int:
    """Minimum of ``|N(F)| - |F|`` over nonempty edge subsets ``F``.

    Exhaustive over all ``2**|E| - 1`` subsets; neighbourhoods are unions of
    vertex bitmasks built by doubling the table one edge at a time.
    """
    masks = h.edge_masks()
    m = len(masks)
    if m == 0:
        raise HypergraphError("surplus is undefined without edges")
    if m > 26:
        raise ValueError(f"exhaustive surplus over 2**{m} subsets is not supported")
    unions = np.zeros(1 << m, dtype=np.uint64)
    sizes = np.zeros(1 << m, dtype=np.int64)
    for i, mask in enumerate(masks):
        half = 1 << i
        unions[half : 2 * half] = unions[:half] | np.uint64(mask)
        sizes[half : 2 * half] = sizes[:half] + 1
    slack = np.bitwise_count(unions[1:]).astype(np.int64) - sizes[1:]
    return int(slack.min())


def hall_criterion(h: Hypergraph) -> bool:
    """True when every reduced incidence graph has a perfect matching (surplus 3)."""
    return surplus(h) == 3


@dataclass
class BoundReport:
    per_triple: dict[VertexTriple, int]
    min_bound: int
    argmin_triples: list[VertexTriple]
    surplus: int
    bregman_minc_at_argmin: float
    uniform_bound_24: float
    uniform_bound_pow2: int
    bregman_minc: dict[VertexTriple, float] = field(default_factory=dict, repr=False)


def min_matching_bound(h: Hypergraph) -> BoundReport:
    """Evaluate the matching bound at every triple and collect the auxiliary bounds."""
    if h.n < 4:
        raise HypergraphError(f"need at least 4 vertices, got {h.n}")
    inc = incidence_matrix(h)
    if not h.is_balanced():
        raise HypergraphError(
            f"matching bound needs a balanced hypergraph ({h.num_edges} edges, n={h.n})"
        )
    per_triple: dict[VertexTriple, int] = {}
    bm: dict[VertexTriple, float] = {}
    for t in all_triples(h.n):
        per_triple[t] = permanent(delete_vertices(inc, t).entries)
        bm[t] = bregman_minc(h, t)
    low = min(per_triple.values())
    argmin = [t for t, p in per_triple.items() if p == low]
    u24, u2 = uniform_bounds(h.n)
    return BoundReport(
        per_triple=per_triple,
        min_bound=low,
        argmin_triples=argmin,
        surplus=surplus(h),
        bregman_minc_at_argmin=bm[argmin[0]],
        uniform_bound_24=u24,
        uniform_bound_pow2=u2,
        bregman_minc=bm,
    )
