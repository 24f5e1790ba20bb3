"""Exact monomer-dimer combinatorics for regular bipartite graphs and lattices."""

from .errors import DimerlabError
from .graph_core import CanonicalForm, Graph, canonical_form, emit_graph6, parse_graph6, validate
from .matchings import (
    MatchingVector,
    brute_force_matchings,
    complete_graph_matchings,
    count_matchings,
    deletion_contraction_matchings,
)
from .positivity import (
    LogRatioTerm,
    PositivityReport,
    d_terms,
    delta_sign,
    finite_difference,
    test_graph_positivity,
    test_virial_positivity,
    u_terms,
)
from .series import RationalSeries

__all__ = [
    "CanonicalForm",
    "DimerlabError",
    "Graph",
    "LogRatioTerm",
    "MatchingVector",
    "PositivityReport",
    "RationalSeries",
    "brute_force_matchings",
    "canonical_form",
    "complete_graph_matchings",
    "count_matchings",
    "d_terms",
    "deletion_contraction_matchings",
    "delta_sign",
    "emit_graph6",
    "finite_difference",
    "parse_graph6",
    "test_graph_positivity",
    "test_virial_positivity",
    "u_terms",
    "validate",
]

__version__ = "0.1.0"
