import random

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from xratio.cohomology import (
    DegenerateInputError,
    TruncatedPolynomial,
    class_product,
    cohomology_bound,
    incidence_class,
    multiply,
)
from xratio.hypergraph import Hypergraph, HypergraphError, all_triples, delete_vertices, incidence_matrix
from xratio.matching import enumerate_perfect_matchings, matching_bound

from conftest import CUBE, DOUBLED, SINGLE, hypergraphs, random_batch

H = sympy.symbols("H0:3")


def to_sympy(p: TruncatedPolynomial):
    syms = sympy.symbols(f"H0:{p.nvars}")
    return sum(
        (c * sympy.prod([s**x for s, x in zip(syms, exps)]) for exps, c in p.items()),
        sympy.Integer(0),
    )


def truncate(expr, nvars):
    syms = sympy.symbols(f"H0:{nvars}")
    poly = sympy.Poly(sympy.expand(expr), *syms)
    return {m: int(c) for m, c in poly.terms() if c and max(m) <= 3}


@st.composite
def polys(draw, nvars=3):
    exps = st.tuples(*[st.integers(0, 3)] * nvars)
    terms = draw(st.dictionaries(exps, st.integers(1, 9), max_size=8))
    return TruncatedPolynomial(nvars, terms)


class TestRing:
    def test_identity(self):
        p = TruncatedPolynomial(3, {(1, 0, 2): 3, (0, 1, 0): 1})
        assert p * TruncatedPolynomial.one(3) == p

    def test_truncation(self):
        a3 = TruncatedPolynomial.monomial(1, [0, 0, 0])
        a = TruncatedPolynomial.monomial(1, [0])
        assert (a3 * a).is_zero()

    def test_construction_drops_high_powers(self):
        p = TruncatedPolynomial(2, {(4, 0): 1, (1, 1): 0, (3, 3): 2})
        assert p.items() == [((3, 3), 2)]

    def test_mismatched_variables(self):
        with pytest.raises(ValueError):
            TruncatedPolynomial.one(2) * TruncatedPolynomial.one(3)

    def test_cube_product_matches_expansion(self):
        e1, e2, e3 = H
        expr = e1**3 * e2**2 * e3 * (e1 + e3) * (e2 + e3) ** 2
        # untruncated: the six monomials, two of them with coefficient 2
        full = sympy.Poly(sympy.expand(expr), *H).terms()
        assert sorted(full) == sorted(
            [
                ((4, 4, 1), 1),
                ((4, 3, 2), 2),
                ((3, 4, 2), 1),
                ((4, 2, 3), 1),
                ((3, 3, 3), 2),
                ((3, 2, 4), 1),
            ]
        )
        base = TruncatedPolynomial(3, {(3, 2, 1): 1})
        s1 = TruncatedPolynomial(3, {(1, 0, 0): 1, (0, 0, 1): 1})
        s2 = TruncatedPolynomial(3, {(0, 1, 0): 1, (0, 0, 1): 1})
        product = base * s1 * s2 * s2
        assert product.items() == [((3, 3, 3), 2)]
        assert product.coefficient((3, 3, 3)) == 2

    @given(polys(), polys())
    def test_commutative(self, p, q):
        assert p * q == q * p

    @given(polys(), polys(), polys())
    def test_associative(self, p, q, r):
        assert (p * q) * r == p * (q * r)

    @given(polys(), polys(), polys())
    def test_distributive(self, p, q, r):
        assert p * (q + r) == p * q + p * r

    @given(polys(), polys())
    def test_matches_sympy(self, p, q):
        expected = truncate(to_sympy(p) * to_sympy(q), 3)
        assert dict((p * q).items()) == expected

    @given(polys(), polys())
    def test_no_exponent_above_three(self, p, q):
        assert (p * q).max_exponent() <= 3

    def test_elementary_symmetric(self):
        p = TruncatedPolynomial.elementary_symmetric(4, [0, 2, 3], 2)
        assert p.items() == [((0, 0, 1, 1), 1), ((1, 0, 0, 1), 1), ((1, 0, 1, 0), 1)]
        assert TruncatedPolynomial.elementary_symmetric(4, [1], 0) == TruncatedPolynomial.one(4)
        assert TruncatedPolynomial.elementary_symmetric(4, [], -1).is_zero()

    def test_keep_filter(self):
        p = TruncatedPolynomial(2, {(1, 0): 1, (0, 1): 1})
        # demand exponent >= 1 in variable 0: field offset 4 - 1 = 3
        keep = 3 | (4 << 3)
        assert multiply(p, TruncatedPolynomial.one(2), keep=keep).items() == [((1, 0), 1)]


class TestIncidenceClass:
    def test_cube_vertex_in_triple(self):
        c = incidence_class(CUBE, 1, (1, 2, 3))
        assert c.poly == TruncatedPolynomial.monomial(3, [0, 1])

    def test_cube_vertex_outside(self):
        c = incidence_class(CUBE, 4, (1, 2, 3))
        assert c.poly == TruncatedPolynomial(3, {(1, 0, 0): 1, (0, 0, 1): 1})

    def test_star_of_one(self):
        h = Hypergraph(5, [[1, 2, 3, 4], [1, 2, 3, 5]])
        assert incidence_class(h, 5, (1, 2, 3)).poly == TruncatedPolynomial.one(2)

    def test_cube_classes(self):
        polys = [incidence_class(CUBE, v, (1, 2, 3)).poly for v in range(1, 7)]
        assert polys[0] == polys[1] == TruncatedPolynomial.monomial(3, [0, 1])
        assert polys[2] == TruncatedPolynomial.monomial(3, [0, 2])
        assert polys[4] == polys[5] == TruncatedPolynomial(3, {(0, 1, 0): 1, (0, 0, 1): 1})

    def test_isolated_outside_triple(self):
        with pytest.raises(DegenerateInputError):
            incidence_class(DOUBLED, 5, (1, 2, 3))
        # inside the triple the class is the empty product
        assert incidence_class(DOUBLED, 5, (3, 4, 5)).poly == TruncatedPolynomial.one(2)


class TestBound:
    def test_cube(self):
        assert cohomology_bound(CUBE, (1, 2, 3)) == 2

    def test_single(self):
        for t in all_triples(4):
            assert cohomology_bound(SINGLE, t) == 1

    def test_doubled(self):
        assert cohomology_bound(DOUBLED, (3, 4, 5)) == 2
        assert cohomology_bound(DOUBLED, (1, 2, 3)) == 0

    def test_unbalanced(self):
        with pytest.raises(HypergraphError):
            cohomology_bound(Hypergraph(6, [[1, 2, 3, 4]]), (1, 2, 3))

    def test_unpruned_product_agrees(self):
        for h in random_batch([6, 7], 20, base_seed=42):
            for t in all_triples(h.n)[::3]:
                if any(not h.vertex_star(v) for v in h.vertices if v not in t):
                    continue
                product = class_product(h, t)
                assert product.degrees() <= {3 * h.num_edges}
                assert product.coefficient([3] * h.num_edges) == cohomology_bound(h, t)

    def test_degree_bookkeeping(self):
        for h in random_batch([7, 8], 20, base_seed=43):
            t = (1, 2, 3)
            if any(not h.vertex_star(v) for v in h.vertices if v not in t):
                continue
            total = sum(
                next(iter(incidence_class(h, v, t).poly.degrees())) for v in h.vertices
            )
            assert total == 3 * h.num_edges

    def test_cross_method(self):
        rng = random.Random(11)
        for h in random_batch([7, 8, 9, 10], 100, base_seed=700):
            for t in rng.sample(all_triples(h.n), 5):
                reduced = delete_vertices(incidence_matrix(h), t).entries
                count = len(enumerate_perfect_matchings(reduced))
                assert cohomology_bound(h, t) == matching_bound(h, t) == count

    @given(hypergraphs(min_n=5, max_n=8), st.data())
    def test_cross_method_property(self, h, data):
        t = data.draw(st.sampled_from(all_triples(h.n)))
        assert cohomology_bound(h, t) == matching_bound(h, t)
