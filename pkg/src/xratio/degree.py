"""Exact cross-ratio degrees via Goldner's splitting recursion.

Pick an edge ``e`` and a pair ``{a, b}`` inside it.  Every vertex set ``S``
containing ``a, b`` and avoiding the other two vertices of ``e``, such that no
other edge meets ``S`` in exactly two vertices, splits the remaining edges
into a hypergraph on ``S + {fresh}`` and one on ``(V - S) + {fresh}``.  The
degree is the sum over such ``S`` of the product of the two child degrees.

Conventions that make the recursion total:

* unbalanced hypergraphs (``|E| != n - 3``) have degree 0;
* a hypergraph with edges and an isolated vertex has degree 0;
* the edgeless hypergraph on 3 vertices and any single edge have degree 1.

Internally a hypergraph is ``(n, masks)`` with vertex ``v`` stored as bit
``v - 1``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

from .hypergraph import Hypergraph, HypergraphError

__all__ = [
    "DegreeTimeout",
    "GoldnerSplit",
    "valid_splits",
    "cross_ratio_degree",
    "degree_with_choice",
    "normalized_form",
    "clear_cache",
]

_MEMO: dict[tuple[int, tuple[int, ...]], int] = {}
_MEMO_LIMIT = 2_000_000


class DegreeTimeout(RuntimeError):
    """The recursion ran past its deadline."""


def clear_cache() -> None:
    _MEMO.clear()


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def normalized_form(n: int, masks: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Cheap relabeling-invariant-ish key: sort, relabel by first appearance, re-sort.

    Two hypergraphs with equal keys are isomorphic; the converse need not hold.
    """
    edges = sorted(tuple(_bits(m)) for m in masks)
    order: dict[int, int] = {}
    for e in edges:
        for v in e:
            if v not in order:
                order[v] = len(order)
    # isolated vertices go last
    for v in range(n):
        if v not in order:
            order[v] = len(order)
    return n, tuple(sorted(sum(1 << order[v] for v in e) for e in edges))


# --------------------------------------------------------------------------
# split enumeration


def _split_plan(n: int, masks: Sequence[int], pivot: int, pair: tuple[int, int]):
    """Precompute which edges to test after each free vertex is decided.

    Returns ``None`` when some other edge lies inside the pivot edge, since it
    then meets every candidate set in exactly the pair.
    """
    e = masks[pivot]
    base = (1 << pair[0]) | (1 << pair[1])
    free = [v for v in range(n) if not e >> v & 1]
    checks: list[list[int]] = [[] for _ in free]
    for i, other in enumerate(masks):
        if i == pivot:
            continue
        last = -1
        for j, v in enumerate(free):
            if other >> v & 1:
                last = j
        if last < 0:
            if _popcount(other & base) == 2:
                return None
            continue
        checks[last].append(other)
    return base, free, checks


def _iter_subsets(n: int, masks: Sequence[int], pivot: int, pair: tuple[int, int]) -> Iterator[int]:
    plan = _split_plan(n, masks, pivot, pair)
    if plan is None:
        return
    base, free, checks = plan
    depth = len(free)
    stack = [(0, base)]
    while stack:
        j, chosen = stack.pop()
        if j == depth:
            yield chosen
            continue
        v = free[j]
        for candidate in (chosen | 1 << v, chosen):
            if all(_popcount(c & candidate) != 2 for c in checks[j]):
                stack.append((j + 1, candidate))


def _count_subsets(n, masks, pivot, pair, cap: int) -> int:
    count = 0
    for _ in _iter_subsets(n, masks, pivot, pair):
        count += 1
        if count >= cap:
            break
    return count


def _compress(mask: int, position: dict[int, int]) -> int:
    out = 0
    for v in _bits(mask):
        out |= 1 << position[v]
    return out


def _side(n: int, others: Sequence[int], side: int) -> tuple[int, tuple[int, ...]]:
    """Child hypergraph on ``side`` plus a fresh vertex appended last."""
    position = {v: i for i, v in enumerate(_bits(side))}
    fresh = len(position)
    edges = []
    for e in others:
        inside = e & side
        if _popcount(inside) >= 3:
            child = _compress(inside, position)
            if e & ~side:
                child |= 1 << fresh
            edges.append(child)
    return fresh + 1, tuple(edges)


def _children(n: int, masks: Sequence[int], pivot: int, subset: int):
    others = [m for i, m in enumerate(masks) if i != pivot]
    full = (1 << n) - 1
    return _side(n, others, subset), _side(n, others, full & ~subset)


def _choose_pivot(n: int, masks: Sequence[int]) -> tuple[int, tuple[int, int]]:
    best = None
    best_count = None
    seen = set()
    for i, e in enumerate(masks):
        if e in seen:
            continue
        seen.add(e)
        for pair in combinations(_bits(e), 2):
            cap = best_count if best_count is not None else 1 << n
            count = _count_subsets(n, masks, i, pair, cap)
            if best_count is None or count < best_count:
                best, best_count = (i, pair), count
                if count == 0:
                    return best
    return best


# --------------------------------------------------------------------------
# recursion


def _degree(n: int, masks: tuple[int, ...], deadline: float | None) -> int:
    m = len(masks)
    if m != n - 3:
        return 0
    if m == 0:
        return 1
    union = 0
    for e in masks:
        union |= e
    if union != (1 << n) - 1:
        return 0
    if m == 1:
        return 1
    key = normalized_form(n, masks)
    cached = _MEMO.get(key)
    if cached is not None:
        return cached
    if deadline is not None and time.monotonic() > deadline:
        raise DegreeTimeout("degree computation exceeded its time budget")
    n, masks = key
    pivot, pair = _choose_pivot(n, masks)
    total = _sum_over_splits(n, masks, pivot, pair, deadline)
    if len(_MEMO) >= _MEMO_LIMIT:
        _MEMO.clear()
    _MEMO[key] = total
    return total


def _sum_over_splits(n, masks, pivot, pair, deadline) -> int:
    total = 0
    for subset in _iter_subsets(n, masks, pivot, pair):
        (nl, left), (nr, right) = _children(n, masks, pivot, subset)
        if len(left) != nl - 3 or len(right) != nr - 3:
            continue
        d_left = _degree(nl, left, deadline)
        if d_left:
            total += d_left * _degree(nr, right, deadline)
    return total


def _deadline(timeout: float | None) -> float | None:
    return None if timeout is None else time.monotonic() + timeout


def cross_ratio_degree(h: Hypergraph, *, timeout: float | None = None) -> int:
    """The cross-ratio degree d_T of ``h``.

    Raises :class:`DegreeTimeout` if ``timeout`` seconds elapse first.
    """
    return _degree(h.n, tuple(h.edge_masks()), _deadline(timeout))


# --------------------------------------------------------------------------
# labeled interface


@dataclass(frozen=True)
class GoldnerSplit:
    """One admissible vertex set of a split, with both child hypergraphs.

    Children are relabeled order-preservingly: ``left`` has vertices
    ``1..len(subset)`` standing for ``subset`` in ascending order, plus the
    fresh vertex ``len(subset) + 1``.  ``right`` likewise for the complement.
    """

    pivot_edge: tuple[int, int, int, int]
    pair: tuple[int, int]
    subset: tuple[int, ...]
    left: Hypergraph
    right: Hypergraph


def _locate(h: Hypergraph, e: Sequence[int], pair: Sequence[int]) -> tuple[int, tuple[int, int]]:
    edge = tuple(sorted(e))
    try:
        pivot = h.edges.index(edge)  # type: ignore[arg-type]
    except ValueError:
        raise HypergraphError(f"{edge} is not an edge of the hypergraph") from None
    p = tuple(sorted(pair))
    if len(p) != 2 or p[0] == p[1] or not set(p) <= set(edge):
        raise HypergraphError(f"pair {p} is not a 2-subset of edge {edge}")
    return pivot, (p[0] - 1, p[1] - 1)


def _to_hypergraph(n: int, masks: Sequence[int]) -> Hypergraph:
    return Hypergraph(n, [[v + 1 for v in _bits(m)] for m in masks])


def valid_splits(h: Hypergraph, e: Sequence[int], pair: Sequence[int]) -> list[GoldnerSplit]:
    """All admissible splits for pivot edge ``e`` (first occurrence) and ``pair``.

    Ordered by the subset's bitmask, ascending.
    """
    pivot, bit_pair = _locate(h, e, pair)
    masks = h.edge_masks()
    out = []
    for subset in sorted(_iter_subsets(h.n, masks, pivot, bit_pair)):
        (nl, left), (nr, right) = _children(h.n, masks, pivot, subset)
        out.append(
            GoldnerSplit(
                pivot_edge=h.edges[pivot],
                pair=(bit_pair[0] + 1, bit_pair[1] + 1),
                subset=tuple(v + 1 for v in _bits(subset)),
                left=_to_hypergraph(nl, left),
                right=_to_hypergraph(nr, right),
            )
        )
    return out


def degree_with_choice(
    h: Hypergraph, e: Sequence[int], pair: Sequence[int], *, timeout: float | None = None
) -> int:
    """Degree computed with the top-level pivot forced to ``(e, pair)``."""
    pivot, bit_pair = _locate(h, e, pair)
    n, masks = h.n, tuple(h.edge_masks())
    if len(masks) != n - 3:
        return 0
    union = 0
    for m in masks:
        union |= m
    if union != (1 << n) - 1:
        return 0
    return _sum_over_splits(n, masks, pivot, bit_pair, _deadline(timeout))
