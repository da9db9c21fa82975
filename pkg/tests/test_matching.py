import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from xratio.hypergraph import (
    HypergraphError,
    VertexTriple,
    all_triples,
    delete_vertices,
    incidence_matrix,
    relabel,
)
from xratio.matching import (
    bregman_minc,
    enumerate_perfect_matchings,
    hall_criterion,
    labeled_matchings,
    matching_bound,
    min_matching_bound,
    permanent,
    surplus,
    uniform_bounds,
)

from conftest import CUBE, DOUBLED, SINGLE, hypergraphs, random_batch


def brute_permanent(a):
    a = np.asarray(a)
    k = a.shape[0]
    return sum(all(a[r, p[r]] for r in range(k)) for p in itertools.permutations(range(k)))


def brute_surplus(h):
    masks = [set(e) for e in h.edges]
    best = None
    for size in range(1, len(masks) + 1):
        for sub in itertools.combinations(masks, size):
            slack = len(set().union(*sub)) - size
            best = slack if best is None else min(best, slack)
    return best


square01 = st.integers(0, 7).flatmap(lambda k: arrays(np.int64, (k, k), elements=st.integers(0, 1)))


class TestPermanent:
    def test_identity(self):
        assert permanent(np.eye(3, dtype=int)) == 1

    def test_all_ones(self):
        assert permanent(np.ones((3, 3), dtype=int)) == 6

    def test_reduced_cube(self):
        assert permanent([[1, 0, 0], [0, 1, 1], [1, 1, 1]]) == 2

    def test_zero_row(self):
        assert permanent([[1, 1, 0], [0, 0, 0], [1, 1, 1]]) == 0

    def test_empty(self):
        assert permanent(np.zeros((0, 0), dtype=int)) == 1

    @pytest.mark.parametrize("k", [10, 13, 16])
    def test_all_ones_factorial(self, k):
        # k = 16 has Ryser terms up to 16**16 > 2**63, so the int64 route is bypassed
        assert permanent(np.ones((k, k), dtype=int)) == math.factorial(k)

    def test_routes_agree_on_band_matrix(self):
        # 0/1 lower Hessenberg all-ones band: permanent 2**(k-1)
        k = 14
        a = np.tril(np.ones((k, k), dtype=int), 1)
        assert permanent(a, method="python") == permanent(a, method="numpy") == 2 ** (k - 1)

    def test_guards(self):
        with pytest.raises(ValueError):
            permanent(np.ones((2, 3), dtype=int))
        with pytest.raises(ValueError):
            permanent(np.ones((31, 31), dtype=int))
        with pytest.raises(ValueError):
            permanent([[2]])

    @given(square01)
    def test_matches_brute_force(self, a):
        expected = brute_permanent(a)
        assert permanent(a) == expected
        assert permanent(a, method="python") == expected
        assert permanent(a, method="numpy") == expected

    @given(square01, st.randoms(use_true_random=False))
    def test_transpose_and_permutations(self, a, rnd):
        k = a.shape[0]
        rows, cols = list(range(k)), list(range(k))
        rnd.shuffle(rows)
        rnd.shuffle(cols)
        p = permanent(a)
        assert permanent(a.T) == p
        assert permanent(a[rows][:, cols]) == p

    @given(square01, st.data())
    def test_monotone(self, a, data):
        zeros = list(zip(*np.nonzero(a == 0)))
        if not zeros:
            return
        r, c = data.draw(st.sampled_from(zeros))
        b = a.copy()
        b[r, c] = 1
        assert permanent(b) >= permanent(a)


class TestEnumeration:
    def test_k22(self):
        assert enumerate_perfect_matchings(np.ones((2, 2), dtype=int)) == [(0, 1), (1, 0)]

    def test_identity(self):
        assert enumerate_perfect_matchings(np.eye(3, dtype=int)) == [(0, 1, 2)]

    def test_cube_matchings_by_label(self):
        b = delete_vertices(incidence_matrix(CUBE), (1, 2, 3))
        assert labeled_matchings(b) == [{0: 4, 1: 5, 2: 6}, {0: 4, 1: 6, 2: 5}]

    def test_guard(self):
        with pytest.raises(ValueError):
            enumerate_perfect_matchings(np.ones((13, 13), dtype=int))

    @settings(max_examples=200)
    @given(st.integers(0, 8).flatmap(lambda k: arrays(np.int64, (k, k), elements=st.integers(0, 1))))
    def test_count_equals_permanent(self, a):
        found = enumerate_perfect_matchings(a)
        assert len(found) == permanent(a)
        assert found == sorted(set(found))
        assert all(a[r, c] for m in found for r, c in enumerate(m))


class TestBounds:
    def test_cube(self):
        assert matching_bound(CUBE, (1, 2, 3)) == 2

    def test_doubled_at_345(self):
        assert matching_bound(DOUBLED, (3, 4, 5)) == 2

    def test_single(self):
        assert matching_bound(SINGLE, (1, 2, 3)) == 1

    def test_unbalanced(self):
        from xratio.hypergraph import Hypergraph

        with pytest.raises(HypergraphError):
            matching_bound(Hypergraph(7, [[1, 2, 3, 4]]), (1, 2, 3))

    def test_min_cube(self):
        r = min_matching_bound(CUBE)
        assert r.min_bound == 2
        assert len(r.per_triple) == 20
        assert set(r.per_triple.values()) == {2}
        assert r.argmin_triples == all_triples(6)
        assert r.surplus == 3

    def test_min_doubled(self):
        # surplus 2 forces a zero somewhere: deleting {1,2,3} leaves two rows on column 4
        r = min_matching_bound(DOUBLED)
        assert r.min_bound == 0
        assert r.per_triple[VertexTriple(1, 2, 3)] == 0
        assert r.per_triple[VertexTriple(3, 4, 5)] == 2
        assert r.surplus == 2

    def test_min_single(self):
        r = min_matching_bound(SINGLE)
        assert r.min_bound == 1
        assert r.uniform_bound_pow2 == 1

    def test_report_fields(self):
        r = min_matching_bound(CUBE)
        assert r.bregman_minc_at_argmin == pytest.approx(bregman_minc(CUBE, r.argmin_triples[0]))
        assert (r.uniform_bound_24, r.uniform_bound_pow2) == uniform_bounds(6)


class TestSurplus:
    def test_cube(self):
        assert surplus(CUBE) == 3
        assert hall_criterion(CUBE)

    def test_doubled(self):
        assert surplus(DOUBLED) == 2
        assert not hall_criterion(DOUBLED)

    def test_single(self):
        assert surplus(SINGLE) == 3
        assert hall_criterion(SINGLE)

    def test_empty(self):
        from xratio.hypergraph import Hypergraph

        with pytest.raises(HypergraphError):
            surplus(Hypergraph(5, []))

    @given(hypergraphs(balanced=False, max_n=10))
    def test_matches_brute_force(self, h):
        if h.num_edges == 0:
            return
        assert surplus(h) == brute_surplus(h) <= 3

    @given(hypergraphs(), st.randoms(use_true_random=False))
    def test_relabel_invariant(self, h, rnd):
        perm = list(h.vertices)
        rnd.shuffle(perm)
        assert surplus(relabel(h, perm)) == surplus(h)

    def test_positive_bound_iff_full_surplus(self):
        for h in random_batch([7, 8, 9], 300, base_seed=5000):
            assert (min_matching_bound(h).min_bound > 0) == (brute_surplus(h) == 3)


class TestAuxiliaryBounds:
    def test_bregman_minc_cube(self):
        expected = 1.0 * math.sqrt(2) * 6 ** (1 / 3)
        assert bregman_minc(CUBE, (1, 2, 3)) == pytest.approx(expected)
        assert bregman_minc(CUBE, (1, 2, 3)) == pytest.approx(2.5698, abs=1e-4)

    def test_bregman_minc_single(self):
        for t in itertools.combinations(range(1, 5), 3):
            assert bregman_minc(SINGLE, t) == 1.0

    def test_bregman_minc_zero_row(self):
        from xratio.hypergraph import Hypergraph

        h = Hypergraph(5, [[1, 2, 3, 4], [1, 2, 3, 5]])
        assert bregman_minc(h, (1, 2, 3)) == 1.0
        h = Hypergraph(5, [[1, 2, 3, 5], [1, 2, 4, 5]])
        assert bregman_minc(h, (1, 2, 3)) == pytest.approx(math.sqrt(2))

    def test_bregman_minc_dominates(self):
        for h in random_batch([8], 40, base_seed=77):
            for t in all_triples(h.n):
                assert matching_bound(h, t) <= math.floor(bregman_minc(h, t) + 1e-9)

    def test_uniform(self):
        u24, u2 = uniform_bounds(4)
        assert u24 == pytest.approx(2.21336, abs=1e-5) and u2 == 1
        assert uniform_bounds(7) == (pytest.approx(24.0), 8)
        u24, u2 = uniform_bounds(10)
        assert u24 == pytest.approx(260.2374, abs=1e-3) and u2 == 64
        with pytest.raises(ValueError):
            uniform_bounds(3)

    def test_relabel_preserves_min_bound(self):
        for h in random_batch([8], 10, base_seed=31):
            reversed_labels = list(range(h.n, 0, -1))
            assert min_matching_bound(relabel(h, reversed_labels)).min_bound == min_matching_bound(h).min_bound
