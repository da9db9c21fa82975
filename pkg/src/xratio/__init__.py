"""Exact cross-ratio degrees of 4-uniform hypergraphs and their matching bounds."""

__version__ = "0.1.0"

from .cohomology import TruncatedPolynomial, cohomology_bound, incidence_class
from .degree import cross_ratio_degree, degree_with_choice, valid_splits
from .hypergraph import (
    BiadjacencyMatrix,
    Hypergraph,
    VertexTriple,
    add_edge_transform,
    delete_vertices,
    incidence_matrix,
    parse_hypergraph,
    random_hypergraph,
    relabel,
    serialize_hypergraph,
)
from .matching import (
    BoundReport,
    bregman_minc,
    enumerate_perfect_matchings,
    hall_criterion,
    matching_bound,
    min_matching_bound,
    permanent,
    surplus,
    uniform_bounds,
)
