"""Directed follow graph: construction, structure metrics, centralities, power-law fit."""

from .centrality import (
    MEASURES,
    GraphSummary,
    PathLengthResult,
    all_centralities,
    avg_degree,
    avg_shortest_path,
    betweenness,
    centrality,
    centrality_correlations,
    closeness,
    eigenvector,
    pagerank,
    pearson,
    summarize,
    top_k,
)
from .core import (
    SocialGraph,
    build_graph,
    degree_sequences,
    density,
    giant_component,
    graph_from_edges,
    reciprocity,
    weak_components,
)
from .powerlaw import PowerLawFit, fit_power_law

__all__ = [
    "MEASURES", "GraphSummary", "PathLengthResult", "PowerLawFit", "SocialGraph",
    "all_centralities", "avg_degree", "avg_shortest_path", "betweenness", "build_graph",
    "centrality", "centrality_correlations", "closeness", "degree_sequences", "density",
    "eigenvector", "fit_power_law", "giant_component", "graph_from_edges", "pagerank",
    "pearson", "reciprocity", "summarize", "top_k", "weak_components",
]
