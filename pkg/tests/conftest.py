import pytest
from hypothesis import settings
from hypothesis import strategies as st

from xratio.hypergraph import Hypergraph, random_hypergraph

# exponential-time routines make per-example timing meaningless
settings.register_profile("xratio", deadline=None)
settings.load_profile("xratio")

# {1,2,3,4}, {1,2,5,6}, {3,4,5,6}: the smallest hypergraph with degree 2
CUBE = Hypergraph(6, [[1, 2, 3, 4], [1, 2, 5, 6], [3, 4, 5, 6]])
# the same edge twice on five vertices: degree 0 although one reduced graph is K_{2,2}
DOUBLED = Hypergraph(5, [[1, 2, 3, 4], [1, 2, 3, 4]])
SINGLE = Hypergraph(4, [[1, 2, 3, 4]])


@pytest.fixture
def cube():
    return CUBE


@pytest.fixture
def doubled():
    return DOUBLED


@pytest.fixture
def single():
    return SINGLE


def random_batch(ns, count, base_seed=0):
    """Deterministic list of balanced random hypergraphs cycling through ``ns``."""
    return [random_hypergraph(ns[i % len(ns)], base_seed + i) for i in range(count)]


@st.composite
def hypergraphs(draw, min_n=5, max_n=9, balanced=True):
    n = draw(st.integers(min_n, max_n))
    quad = st.lists(st.integers(1, n), min_size=4, max_size=4, unique=True)
    m = n - 3 if balanced else draw(st.integers(0, n))
    edges = draw(st.lists(quad, min_size=m, max_size=m))
    return Hypergraph(n, edges)
