"""4-uniform hypergraphs, their incidence matrices, and serialization.

Vertices are labeled ``1..n``.  Edges are 4-element vertex sets stored as
sorted tuples; the edge collection is a multiset, so repeated edges are kept
along with their multiplicity.
"""

from __future__ import annotations

import json
import random
from itertools import combinations
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Hypergraph",
    "BiadjacencyMatrix",
    "VertexTriple",
    "all_triples",
    "HypergraphError",
    "ParseError",
    "parse_hypergraph",
    "serialize_hypergraph",
    "incidence_matrix",
    "delete_vertices",
    "add_edge_transform",
    "relabel",
    "random_hypergraph",
]

Edge = tuple[int, int, int, int]


class HypergraphError(ValueError):
    """Raised for structurally invalid hypergraphs or vertex arguments."""


class ParseError(HypergraphError):
    """Raised when serialized text cannot be turned into a hypergraph."""


def _check_edge(edge: Iterable[int], n: int) -> Edge:
    vs = tuple(edge)
    if len(vs) != 4:
        raise HypergraphError(f"edge {vs} does not have exactly 4 vertices")
    if len(set(vs)) != 4:
        raise HypergraphError(f"edge {vs} repeats a vertex")
    for v in vs:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise HypergraphError(f"edge {vs} has a non-integer vertex {v!r}")
        if not 1 <= v <= n:
            raise HypergraphError(f"vertex {v} of edge {vs} is outside 1..{n}")
    return tuple(sorted(int(v) for v in vs))  # type: ignore[return-value]


@dataclass(frozen=True)
class Hypergraph:
    """A 4-uniform hypergraph on vertices ``1..n`` with a multiset of edges.

    Edges keep their insertion order; each edge is normalized to a sorted
    4-tuple.  Hypergraphs with any number of edges can be represented, but
    only *balanced* ones (``len(edges) == n - 3``) have a cross-ratio degree
    in the usual sense.
    """

    n: int
    edges: tuple[Edge, ...]

    def __init__(self, n: int, edges: Iterable[Iterable[int]] = ()):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
            raise HypergraphError(f"vertex count must be a nonnegative integer, got {n!r}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", tuple(_check_edge(e, int(n)) for e in edges))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def is_balanced(self) -> bool:
        return len(self.edges) == self.n - 3

    def vertex_star(self, v: int) -> list[int]:
        """Indices of the edges containing ``v``."""
        return [i for i, e in enumerate(self.edges) if v in e]

    def degrees(self) -> list[int]:
        """``degrees()[v - 1]`` is the number of edges containing ``v``."""
        counts = [0] * self.n
        for e in self.edges:
            for v in e:
                counts[v - 1] += 1
        return counts

    def isolated_vertices(self) -> list[int]:
        return [v for v, d in zip(self.vertices, self.degrees()) if d == 0]

    def edge_masks(self) -> list[int]:
        """Edges as bitmasks; vertex ``v`` is bit ``v - 1``."""
        return [sum(1 << (v - 1) for v in e) for e in self.edges]

    def edge_multiset(self) -> list[Edge]:
        return sorted(self.edges)

    def same_multiset(self, other: Hypergraph) -> bool:
        return self.n == other.n and self.edge_multiset() == other.edge_multiset()

    def __str__(self) -> str:
        body = ", ".join("{" + ",".join(map(str, e)) + "}" for e in self.edges)
        return f"Hypergraph(n={self.n}, edges=[{body}])"


class VertexTriple(NamedTuple):
    """Three distinct vertex labels in ascending order."""

    v1: int
    v2: int
    v3: int

    @classmethod
    def of(cls, a: int, b: int, c: int, n: int | None = None) -> VertexTriple:
        labels = sorted((int(a), int(b), int(c)))
        if len(set(labels)) != 3:
            raise HypergraphError(f"triple {labels} has repeated vertices")
        if labels[0] < 1 or (n is not None and labels[2] > n):
            raise HypergraphError(f"triple {labels} is outside 1..{n}")
        return cls(*labels)

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> VertexTriple:
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 3:
            raise HypergraphError(f"expected three comma-separated vertices, got {text!r}")
        try:
            a, b, c = (int(p) for p in parts)
        except ValueError as exc:
            raise HypergraphError(f"bad triple {text!r}") from exc
        return cls.of(a, b, c, n)

    def __str__(self) -> str:
        return f"{self.v1},{self.v2},{self.v3}"


def all_triples(n: int) -> list[VertexTriple]:
    return [VertexTriple(*c) for c in combinations(range(1, n + 1), 3)]


@dataclass(frozen=True)
class BiadjacencyMatrix:
    """Edge-by-vertex 0/1 matrix of the bipartite incidence graph.

    ``rows`` holds edge indices into the source hypergraph and ``cols`` the
    vertex labels of the surviving columns.
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    entries: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def is_square(self) -> bool:
        return len(self.rows) == len(self.cols)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BiadjacencyMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.entries, other.entries)
        )

    __hash__ = None  # type: ignore[assignment]


# --------------------------------------------------------------------------
# serialization


def parse_hypergraph(text: bytes | str, format: str = "json") -> Hypergraph:
    """Parse the JSON or plain-text form of a hypergraph.

    JSON: ``{"n": 6, "edges": [[1,2,3,4], ...]}``.  Plain: a ``n <int>``
    header line followed by one edge per line (four integers); lines starting
    with ``#`` are comments.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from exc
    if format == "json":
        n, edges = _parse_json(text)
    elif format == "plain":
        n, edges = _parse_plain(text)
    else:
        raise ValueError(f"unknown format {format!r}")
    if n < 4:
        raise ParseError(f"n must be at least 4, got {n}")
    try:
        return Hypergraph(n, edges)
    except ParseError:
        raise
    except HypergraphError as exc:
        raise ParseError(str(exc)) from exc


def _parse_json(text: str) -> tuple[int, list[list[int]]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict) or "n" not in data or "edges" not in data:
        raise ParseError('expected an object with fields "n" and "edges"')
    n, edges = data["n"], data["edges"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ParseError(f'"n" must be an integer, got {n!r}')
    if not isinstance(edges, list) or not all(isinstance(e, list) for e in edges):
        raise ParseError('"edges" must be an array of arrays')
    for e in edges:
        if any(isinstance(v, bool) or not isinstance(v, int) for v in e):
            raise ParseError(f"edge {e} contains a non-integer")
    return n, edges


def _parse_plain(text: str) -> tuple[int, list[list[int]]]:
    n = None
    edges: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 2 or fields[0] != "n":
                raise ParseError(f"line {lineno}: expected header 'n <int>'")
            try:
                n = int(fields[1])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: bad vertex count {fields[1]!r}") from exc
            continue
        try:
            edges.append([int(f) for f in fields])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer vertex in {line!r}") from exc
        if len(fields) != 4:
            raise ParseError(f"line {lineno}: edge needs exactly 4 vertices, got {len(fields)}")
    if n is None:
        raise ParseError("missing 'n <int>' header")
    return n, edges


def serialize_hypergraph(h: Hypergraph, format: str = "json") -> bytes:
    """Canonical serialization: edges sorted lexicographically."""
    edges = h.edge_multiset()
    if format == "json":
        body = ",".join("[" + ",".join(map(str, e)) + "]" for e in edges)
        return f'{{"n":{h.n},"edges":[{body}]}}'.encode()
    if format == "plain":
        lines = [f"n {h.n}"] + [" ".join(map(str, e)) for e in edges]
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {format!r}")


def edges_to_plain(h: Hypergraph) -> str:
    """Compact ``;``-separated edge list, as used in experiment CSV rows."""
    return ";".join(" ".join(map(str, e)) for e in h.edge_multiset())


# --------------------------------------------------------------------------
# incidence graph


def incidence_matrix(h: Hypergraph) -> BiadjacencyMatrix:
    entries = np.zeros((h.num_edges, h.n), dtype=np.int64)
    for i, e in enumerate(h.edges):
        for v in e:
            entries[i, v - 1] = 1
    return BiadjacencyMatrix(tuple(range(h.num_edges)), tuple(h.vertices), entries)


def delete_vertices(b: BiadjacencyMatrix, t: Sequence[int]) -> BiadjacencyMatrix:
    """Drop the columns of the vertices in ``t``."""
    missing = [v for v in t if v not in b.cols]
    if missing:
        raise HypergraphError(f"vertices {missing} are not columns of the matrix")
    drop = set(t)
    keep = [j for j, v in enumerate(b.cols) if v not in drop]
    return BiadjacencyMatrix(b.rows, tuple(b.cols[j] for j in keep), b.entries[:, keep])


# --------------------------------------------------------------------------
# transformations


def add_edge_transform(h: Hypergraph, t: Sequence[int]) -> Hypergraph:
    """Add a vertex ``n + 1`` and the edge ``t ∪ {n + 1}``; the degree is unchanged."""
    t = VertexTriple.of(*t, n=h.n)
    return Hypergraph(h.n + 1, h.edges + ((t.v1, t.v2, t.v3, h.n + 1),))


def relabel(h: Hypergraph, perm: Sequence[int] | dict[int, int]) -> Hypergraph:
    """Rename vertices.  ``perm`` maps label ``v`` to ``perm[v]``.

    A sequence is read 1-based: ``perm[v - 1]`` is the image of ``v``.
    """
    if isinstance(perm, dict):
        mapping = dict(perm)
    else:
        mapping = {v: int(p) for v, p in zip(h.vertices, perm)}
    if sorted(mapping) != list(h.vertices) or sorted(mapping.values()) != list(h.vertices):
        raise HypergraphError(f"not a permutation of 1..{h.n}")
    return Hypergraph(h.n, [[mapping[v] for v in e] for e in h.edges])


def random_hypergraph(n: int, rng_seed: int) -> Hypergraph:
    """Balanced hypergraph with ``n - 3`` i.i.d. uniform 4-subsets (repeats allowed)."""
    if n < 5:
        raise HypergraphError(f"random hypergraphs need n >= 5, got {n}")
    rng = random.Random(rng_seed)
    labels = range(1, n + 1)
    return Hypergraph(n, [rng.sample(labels, 4) for _ in range(n - 3)])
