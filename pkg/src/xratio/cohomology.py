"""Truncated polynomial arithmetic in Z[H_e : e in E] / <H_e^4>.

The matching bound reappears as the coefficient of prod_e H_e^3 in a product
of incidence classes, one per vertex.  This module recomputes it that way,
independently of any permanent or matching code.

Monomials are packed into a Python int with a 3-bit field per variable.
Exponents are at most 3, so adding two packed monomials never carries across
fields, and a field reaching 4 shows up as its high bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .hypergraph import Hypergraph, HypergraphError, VertexTriple

__all__ = [
    "TruncatedPolynomial",
    "IncidenceClass",
    "DegenerateInputError",
    "incidence_class",
    "multiply",
    "class_product",
    "cohomology_bound",
]

_FIELD = 3
_COEFF_LIMIT = 1 << 64


class DegenerateInputError(HypergraphError):
    """An incidence class is undefined (a vertex outside the triple is isolated)."""


def _high_bits(nvars: int) -> int:
    return sum(4 << (_FIELD * i) for i in range(nvars))


def _pack(exponents: Sequence[int]) -> int:
    out = 0
    for i, x in enumerate(exponents):
        out |= x << (_FIELD * i)
    return out


def _unpack(mono: int, nvars: int) -> tuple[int, ...]:
    return tuple((mono >> (_FIELD * i)) & 7 for i in range(nvars))


class TruncatedPolynomial:
    """Polynomial in ``nvars`` variables with every exponent at most 3.

    Monomials with an exponent of 4 or more vanish in the ring and are never
    stored; neither are zero coefficients.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], int] | None = None):
        self.nvars = nvars
        self.terms: dict[int, int] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nvars:
                raise ValueError(f"exponent vector {exps} has length {len(exps)}, expected {nvars}")
            if any(x < 0 for x in exps):
                raise ValueError(f"negative exponent in {exps}")
            if c and max(exps, default=0) <= 3:
                key = _pack(exps)
                self.terms[key] = self.terms.get(key, 0) + c
        self.terms = {k: c for k, c in self.terms.items() if c}

    @classmethod
    def _from_packed(cls, nvars: int, terms: dict[int, int]) -> TruncatedPolynomial:
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        return p

    @classmethod
    def one(cls, nvars: int) -> TruncatedPolynomial:
        return cls._from_packed(nvars, {0: 1})

    @classmethod
    def zero(cls, nvars: int) -> TruncatedPolynomial:
        return cls._from_packed(nvars, {})

    @classmethod
    def monomial(cls, nvars: int, variables: Iterable[int], coeff: int = 1) -> TruncatedPolynomial:
        """Product of the listed variables (repeats raise the exponent)."""
        exps = [0] * nvars
        for i in variables:
            exps[i] += 1
        return cls(nvars, {tuple(exps): coeff})

    @classmethod
    def elementary_symmetric(cls, nvars: int, variables: Sequence[int], k: int) -> TruncatedPolynomial:
        if k < 0 or k > len(variables):
            return cls.zero(nvars)
        terms: dict[int, int] = {}
        for subset in combinations(variables, k):
            key = sum(1 << (_FIELD * i) for i in subset)
            terms[key] = terms.get(key, 0) + 1
        return cls._from_packed(nvars, terms)

    def items(self) -> list[tuple[tuple[int, ...], int]]:
        return sorted((_unpack(k, self.nvars), c) for k, c in self.terms.items())

    def coefficient(self, exponents: Sequence[int]) -> int:
        exps = tuple(exponents)
        if len(exps) != self.nvars or max(exps, default=0) > 3:
            return 0
        return self.terms.get(_pack(exps), 0)

    def degrees(self) -> set[int]:
        return {sum(_unpack(k, self.nvars)) for k in self.terms}

    def max_exponent(self) -> int:
        return max((max(_unpack(k, self.nvars), default=0) for k in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: TruncatedPolynomial) -> None:
        if not isinstance(other, TruncatedPolynomial):
            raise TypeError(f"cannot combine with {type(other).__name__}")
        if other.nvars != self.nvars:
            raise ValueError(f"variable sets differ: {self.nvars} vs {other.nvars}")

    def __add__(self, other: TruncatedPolynomial) -> TruncatedPolynomial:
        self._check(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            s = terms.get(k, 0) + c
            if s:
                terms[k] = s
            else:
                terms.pop(k, None)
        return self._from_packed(self.nvars, terms)

    def __mul__(self, other: TruncatedPolynomial) -> TruncatedPolynomial:
        return multiply(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedPolynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.items():
            mono = "*".join(
                f"H{i}" if x == 1 else f"H{i}^{x}" for i, x in enumerate(exps) if x
            )
            parts.append(mono if c == 1 and mono else f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def multiply(
    p: TruncatedPolynomial, q: TruncatedPolynomial, *, keep: int | None = None
) -> TruncatedPolynomial:
    """Product in the truncated ring.

    ``keep`` is an optional packed per-field offset: a product monomial ``m``
    survives only if every field of ``m + keep`` reaches 4.  This expresses
    "exponent of H_e is at least need_e" with ``keep`` field ``4 - need_e``.
    """
    p._check(q)
    high = _high_bits(p.nvars)
    out: dict[int, int] = {}
    for a, ca in p.terms.items():
        for b, cb in q.terms.items():
            m = a + b
            if m & high:
                continue
            if keep is not None and (m + keep) & high != high:
                continue
            c = out.get(m, 0) + ca * cb
            if c >= _COEFF_LIMIT:
                raise OverflowError("coefficient no longer fits in 64 bits")
            out[m] = c
    return TruncatedPolynomial._from_packed(p.nvars, out)


@dataclass(frozen=True)
class IncidenceClass:
    vertex: int
    poly: TruncatedPolynomial


def incidence_class(h: Hypergraph, v: int, t: Sequence[int]) -> IncidenceClass:
    """Class of the incidence subvariety of ``v`` after adding the edge ``t ∪ {n+1}``.

    Vertices of ``t`` give the monomial of their whole star; every other
    vertex gives the elementary symmetric polynomial of degree ``|star| - 1``
    in its star.  Variables are indexed by edge position in ``h``.
    """
    t = VertexTriple.of(*t, n=h.n)
    if not 1 <= v <= h.n:
        raise HypergraphError(f"vertex {v} is outside 1..{h.n}")
    star = h.vertex_star(v)
    nvars = h.num_edges
    if v in t:
        return IncidenceClass(v, TruncatedPolynomial.monomial(nvars, star))
    if not star:
        raise DegenerateInputError(f"vertex {v} lies in no edge")
    return IncidenceClass(v, TruncatedPolynomial.elementary_symmetric(nvars, star, len(star) - 1))


def class_product(h: Hypergraph, t: Sequence[int]) -> TruncatedPolynomial:
    """Unpruned product of all incidence classes (small inputs only)."""
    out = TruncatedPolynomial.one(h.num_edges)
    for v in h.vertices:
        out = out * incidence_class(h, v, t).poly
    return out


def cohomology_bound(h: Hypergraph, t: Sequence[int]) -> int:
    """Coefficient of prod_e H_e^3 in the product of all incidence classes.

    Returns 0 when a vertex outside ``t`` is isolated: its class has degree
    -1, i.e. it is zero, and correspondingly the reduced incidence matrix has
    a zero column.
    """
    if not h.is_balanced():
        raise HypergraphError(
            f"cohomology bound needs a balanced hypergraph ({h.num_edges} edges, n={h.n})"
        )
    t = VertexTriple.of(*t, n=h.n)
    nvars = h.num_edges
    try:
        classes = [incidence_class(h, v, t) for v in h.vertices]
    except DegenerateInputError:
        return 0
    codim = sum(next(iter(c.poly.degrees())) for c in classes)
    if codim != 3 * nvars:
        raise AssertionError(f"class degrees sum to {codim}, expected {3 * nvars}")

    # classes equal to 1 contribute nothing
    classes = [c for c in classes if c.poly.terms != {0: 1}]
    classes.sort(key=lambda c: (len(c.poly.terms), c.vertex))

    # remaining[e]: how many classes still to multiply can raise H_e
    remaining = [0] * nvars
    for c in classes:
        for e in h.vertex_star(c.vertex):
            remaining[e] += 1

    product = TruncatedPolynomial.one(nvars)
    for c in classes:
        for e in h.vertex_star(c.vertex):
            remaining[e] -= 1
        keep = sum(
            (4 - max(0, 3 - remaining[e])) << (_FIELD * e) for e in range(nvars)
        )
        product = multiply(product, c.poly, keep=keep)
        if product.is_zero():
            return 0
    return product.coefficient([3] * nvars)
