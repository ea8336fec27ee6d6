"""Node centralities, path lengths and summary metrics for a :class:`SocialGraph`."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Mapping, Optional

import numpy as np

from ..errors import ConvergenceError, NumericError, ValidationError
from . import _kernels
from .core import SocialGraph, giant_component, reciprocity, weak_components

MEASURES = ("degree_all", "degree_in", "degree_out", "closeness", "betweenness",
            "pagerank", "eigenvector")

EXACT_BETWEENNESS_MAX_N = 10_000
BETWEENNESS_SAMPLES = 2048
EXACT_PATHS_MAX_N = 5_000
PATH_SAMPLES = 1024


def _sample_sources(n, k, seed):
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=min(k, n), replace=False)).astype(np.int64)


# --------------------------------------------------------------------------
# shortest paths


@dataclass(frozen=True)
class PathLengthResult:
    value: Optional[float]
    reachable_share: float
    mode: str
    n_sources: int
    stderr: Optional[float] = None


def avg_shortest_path(graph: SocialGraph, mode="auto", n_sources=PATH_SAMPLES, seed=0,
                      exact_threshold=EXACT_PATHS_MAX_N) -> PathLengthResult:
    """Mean directed distance over ordered reachable pairs.

    ``mode`` is ``"exact"`` (BFS from every node), ``"sampled"`` (BFS from
    ``n_sources`` uniformly drawn sources) or ``"auto"`` (exact when
    ``n <= exact_threshold``). The sampled estimate is the ratio of summed
    distances to reached pairs over the sample; ``stderr`` is its
    delta-method standard error with finite-population correction.
    """
    n = graph.n_nodes
    if mode == "auto":
        mode = "exact" if n <= exact_threshold else "sampled"
    if mode == "exact":
        sources = np.arange(n, dtype=np.int64)
    elif mode == "sampled":
        sources = _sample_sources(n, n_sources, seed)
    else:
        raise ValidationError(f"unknown path-length mode {mode!r}")
    reach, total = _kernels.distance_sums(graph.out_indptr, graph.out_indices, sources)
    pairs = reach.sum()
    share = float(pairs / (len(sources) * (n - 1))) if n > 1 else 0.0
    if pairs == 0:
        return PathLengthResult(None, share, mode, len(sources))
    value = float(total.sum() / pairs)
    stderr = None
    k = len(sources)
    if mode == "sampled" and k > 1:
        resid = total - value * reach
        mean_reach = reach.mean()
        fpc = 1.0 - k / n
        stderr = float(math.sqrt(max(fpc, 0.0) * resid.var(ddof=1) / k) / mean_reach)
    elif mode == "exact":
        stderr = 0.0
    return PathLengthResult(value, share, mode, k, stderr)


# --------------------------------------------------------------------------
# centralities


def closeness(graph: SocialGraph, direction="in") -> np.ndarray:
    """Wasserman-Faust closeness: ``(r / (n - 1)) * (r / sum_d)``.

    With ``direction="in"`` distances run from every other node *to* the
    target and ``r`` counts the nodes that can reach it; ``"out"`` uses
    distances from the node instead.
    """
    n = graph.n_nodes
    if direction == "in":
        ptr, idx = graph.in_indptr, graph.in_indices
    elif direction == "out":
        ptr, idx = graph.out_indptr, graph.out_indices
    else:
        raise ValidationError(f"direction must be 'in' or 'out', got {direction!r}")
    if n < 2:
        return np.zeros(n)
    reach, total = _kernels.distance_sums(ptr, idx, np.arange(n, dtype=np.int64))
    out = np.zeros(n)
    ok = total > 0
    r = reach[ok].astype(np.float64)
    out[ok] = (r / (n - 1)) * (r / total[ok])
    return out


def betweenness(graph: SocialGraph, mode="auto", n_sources=BETWEENNESS_SAMPLES, seed=0,
                exact_threshold=EXACT_BETWEENNESS_MAX_N, undirected_pairs=False) -> np.ndarray:
    """Brandes betweenness over directed shortest paths, counted over ordered pairs.

    Sampled mode accumulates dependencies from ``n_sources`` random sources
    and rescales by ``n / n_sources``. ``undirected_pairs=True`` halves the
    result, which on a graph with only mutual edges gives the usual
    undirected (unordered pair) value.
    """
    n = graph.n_nodes
    if mode == "auto":
        mode = "exact" if n <= exact_threshold else "sampled"
    if mode == "exact":
        sources = np.arange(n, dtype=np.int64)
        scale = 1.0
    elif mode == "sampled":
        sources = _sample_sources(n, n_sources, seed)
        scale = n / len(sources)
    else:
        raise ValidationError(f"unknown betweenness mode {mode!r}")
    bc = _kernels.brandes(graph.out_indptr, graph.out_indices, sources) * scale
    return bc / 2.0 if undirected_pairs else bc


def pagerank(graph: SocialGraph, damping=0.85, tol=1e-10, max_iter=1000) -> np.ndarray:
    """PageRank with uniform teleport; dangling nodes spread their mass uniformly.

    Iterates until the L1 change between sweeps drops below ``tol``.
    """
    n = graph.n_nodes
    outdeg = graph.out_degree().astype(np.float64)
    dangling = outdeg == 0
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / outdeg[~dangling]
    at = graph.adjacency().T.tocsr()
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = damping * (at @ (x * inv) + x[dangling].sum() / n) + (1.0 - damping) / n
        nxt /= nxt.sum()
        err = np.abs(nxt - x).sum()
        x = nxt
        if err < tol:
            return x
    raise ConvergenceError(f"pagerank did not converge within max_iter={max_iter} iterations")


def eigenvector(graph: SocialGraph, tol=1e-10, max_iter=1000, symmetrize=True) -> np.ndarray:
    """Principal eigenvector by power iteration, L2-normalized and non-negative.

    Iterates on ``A + I`` (same eigenvectors as ``A``, no oscillation on
    bipartite graphs) where ``A`` is the symmetrized 0/1 adjacency, or the
    in-link adjacency when ``symmetrize=False``.
    """
    n = graph.n_nodes
    a = graph.symmetrized() if symmetrize else graph.adjacency().T.tocsr()
    x = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(max_iter):
        nxt = a @ x + x
        norm = np.linalg.norm(nxt)
        if norm == 0:
            raise NumericError("eigenvector centrality undefined on a graph without edges")
        nxt /= norm
        err = np.linalg.norm(nxt - x)
        x = nxt
        if err < tol:
            return np.abs(x)
    raise ConvergenceError(f"eigenvector centrality did not converge within max_iter={max_iter} iterations")


def centrality(graph: SocialGraph, measure: str, **options) -> np.ndarray:
    if measure == "degree_all":
        return (graph.in_degree() + graph.out_degree()).astype(np.float64)
    if measure == "degree_in":
        return graph.in_degree().astype(np.float64)
    if measure == "degree_out":
        return graph.out_degree().astype(np.float64)
    if measure == "closeness":
        return closeness(graph, **options)
    if measure == "betweenness":
        return betweenness(graph, **options)
    if measure == "pagerank":
        return pagerank(graph, **options)
    if measure == "eigenvector":
        return eigenvector(graph, **options)
    raise ValidationError(f"unknown centrality measure {measure!r}; expected one of {MEASURES}")


def all_centralities(graph: SocialGraph, options: Optional[Mapping[str, dict]] = None):
    options = options or {}
    return {m: centrality(graph, m, **options.get(m, {})) for m in MEASURES}


# --------------------------------------------------------------------------
# summaries


def pearson(x, y) -> Optional[float]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc, yc = x - x.mean(), y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        return None
    return float(np.clip((xc @ yc) / denom, -1.0, 1.0))


def centrality_correlations(vectors: Mapping[str, np.ndarray]):
    """Pearson matrix between centrality vectors as ``(names, rows)``.

    Entries involving a constant vector are ``None``.
    """
    names = list(vectors)
    lengths = {len(v) for v in vectors.values()}
    if len(lengths) > 1:
        raise ValidationError("centrality vectors must have equal length")
    mat = [[None] * len(names) for _ in names]
    for i, a in enumerate(names):
        for j in range(i, len(names)):
            r = pearson(vectors[a], vectors[names[j]])
            if i == j and r is not None:
                r = 1.0
            mat[i][j] = mat[j][i] = r
    return names, mat


def top_k(vector, k, graph: SocialGraph):
    """Top ``k`` nodes by score (ties by node id) and their status tally."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    vector = np.asarray(vector)
    order = np.lexsort((np.arange(len(vector)), -vector))[:k]
    status = graph.attrs.get("status")
    ranked = [
        {"user_id": graph.user_ids[i], "score": float(vector[i]),
         "status": None if status is None else status[i]}
        for i in order
    ]
    tally = Counter(r["status"] for r in ranked if r["status"] is not None)
    return ranked, dict(sorted(tally.items()))


@dataclass(frozen=True)
class GraphSummary:
    n_nodes: int
    n_edges: int
    avg_degree: float
    reciprocity: Optional[float]
    avg_shortest_path: Optional[float]
    reachable_pair_share: float
    path_mode: str
    giant_component_share: float

    def as_dict(self):
        return asdict(self)


def avg_degree(n_nodes: int, n_edges: int) -> float:
    """Edges per node (the "connected to other k nodes" density figure)."""
    if n_nodes <= 0:
        raise ValidationError("avg_degree needs at least one node")
    return n_edges / n_nodes


def summarize(graph: SocialGraph, giant: Optional[SocialGraph] = None, path_mode="auto",
              path_sources=PATH_SAMPLES, seed=0) -> GraphSummary:
    """Summary metrics of ``giant`` (computed from ``graph`` if not given)."""
    giant = giant if giant is not None else giant_component(graph)
    paths = avg_shortest_path(giant, mode=path_mode, n_sources=path_sources, seed=seed)
    return GraphSummary(
        n_nodes=giant.n_nodes,
        n_edges=giant.n_edges,
        avg_degree=avg_degree(giant.n_nodes, giant.n_edges),
        reciprocity=reciprocity(giant),
        avg_shortest_path=paths.value,
        reachable_pair_share=paths.reachable_share,
        path_mode=paths.mode,
        giant_component_share=giant.n_nodes / graph.n_nodes,
    )


__all__ = [
    "MEASURES", "PathLengthResult", "GraphSummary", "avg_shortest_path", "closeness",
    "betweenness", "pagerank", "eigenvector", "centrality", "all_centralities", "pearson",
    "centrality_correlations", "top_k", "avg_degree", "summarize", "weak_components",
]
