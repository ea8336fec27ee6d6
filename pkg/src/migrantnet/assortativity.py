"""Global and multiscale local assortativity.

Global coefficients follow Newman's mixing-matrix formulation on the
directed graph. Local scores weight each node's edge contributions by a
random walk with restart at the focal node, on the undirected view of the
follow graph where mutual follows count twice, and compare against the
global null ``sum_g a_g b_g`` of that undirected view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, ValidationError
from .graph.centrality import pearson
from .graph.core import SocialGraph

DEFAULT_ALPHA_GRID = tuple(np.round(np.linspace(0.0, 0.9, 10), 12))
WALK_TOL = 1e-12


@dataclass(frozen=True)
class MixingMatrix:
    e: np.ndarray
    categories: tuple
    a: np.ndarray = field(init=False)
    b: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "a", self.e.sum(axis=1))
        object.__setattr__(self, "b", self.e.sum(axis=0))

    @property
    def chance(self) -> float:
        return float(self.a @ self.b)

    def coefficient(self) -> Optional[float]:
        """``(trace(e) - sum a_g b_g) / (1 - sum a_g b_g)``; ``None`` with a single effective category."""
        return _r(float(np.trace(self.e)), self.chance)

    def to_record(self):
        return {"categories": list(self.categories), "e": self.e.tolist(),
                "a": self.a.tolist(), "b": self.b.tolist()}


def _r(trace, chance):
    if np.isclose(chance, 1.0, rtol=0.0, atol=1e-15):
        return None
    return (trace - chance) / (1.0 - chance)


def _codes(graph: SocialGraph, attribute):
    values = graph.attribute(attribute)
    if any(v is None for v in values):
        raise ValidationError(f"attribute {attribute!r} missing on some nodes")
    categories, codes = np.unique(values.astype(str), return_inverse=True)
    return tuple(categories.tolist()), codes.astype(np.int64)


def _mix(rows, cols, weights, codes, n_cat):
    e = np.zeros((n_cat, n_cat))
    np.add.at(e, (codes[rows], codes[cols]), weights)
    total = e.sum()
    if total == 0:
        raise ValidationError("no edges to build a mixing matrix from")
    return e / total


def mixing_matrix(graph: SocialGraph, attribute: str, undirected=False) -> MixingMatrix:
    """Edge-fraction matrix between attribute categories.

    ``undirected=True`` uses ``A + A^T``, making the matrix symmetric.
    """
    categories, codes = _codes(graph, attribute)
    if undirected:
        w = graph.symmetrized(weighted=True).tocoo()
        e = _mix(w.row, w.col, w.data, codes, len(categories))
    else:
        src, dst = graph.edges()
        e = _mix(src, dst, np.ones(len(src)), codes, len(categories))
    return MixingMatrix(e, categories)


def categorical_assortativity(graph: SocialGraph, attribute: str) -> Optional[float]:
    if graph.n_edges == 0:
        raise ValidationError("categorical assortativity needs at least one edge")
    return mixing_matrix(graph, attribute).coefficient()


def degree_assortativity(graph: SocialGraph, mode="out_in") -> Optional[float]:
    """Pearson correlation of endpoint degrees across edges.

    ``out_in`` pairs source out-degree with target in-degree over directed
    edges; ``total`` uses degrees of the undirected simple view, counting
    each undirected edge in both directions.
    """
    if mode == "out_in":
        if graph.n_edges < 2:
            return None
        src, dst = graph.edges()
        return pearson(graph.out_degree()[src], graph.in_degree()[dst])
    if mode == "total":
        s = graph.symmetrized().tocoo()
        if s.nnz < 2:
            return None
        deg = np.asarray(graph.symmetrized().sum(axis=1)).ravel()
        return pearson(deg[s.row], deg[s.col])
    raise ValidationError(f"unknown degree assortativity mode {mode!r}")


# --------------------------------------------------------------------------
# random walks with restart


def transition_matrix(graph: SocialGraph):
    """Row-stochastic ``P = D^-1 W`` on ``W = A + A^T``, plus the degree vector."""
    w = graph.symmetrized(weighted=True)
    deg = np.asarray(w.sum(axis=1)).ravel()
    if (deg == 0).any():
        raise ValidationError("random walk undefined: graph has isolated nodes")
    return sp.diags(1.0 / deg) @ w, deg


def _check_alpha(alpha):
    if not 0.0 <= alpha < 1.0:
        raise ValidationError(f"restart parameter alpha must lie in [0, 1), got {alpha}")


def personalized_walk_weights(graph: SocialGraph, node: int, alpha: float, tol=WALK_TOL,
                              max_iter=200_000, transition=None) -> np.ndarray:
    """Stationary vector of the walk that restarts at ``node`` with probability ``1 - alpha``.

    Solves ``w = alpha * w P + (1 - alpha) * e_node`` by fixed-point
    iteration until the L1 change falls below ``tol``.
    """
    _check_alpha(alpha)
    p = transition if transition is not None else transition_matrix(graph)[0]
    pt = p.T.tocsr()
    n = graph.n_nodes
    restart = np.zeros(n)
    restart[node] = 1.0 - alpha
    w = np.zeros(n)
    w[node] = 1.0
    if alpha == 0.0:
        return w
    for _ in range(max_iter):
        nxt = alpha * (pt @ w) + restart
        err = np.abs(nxt - w).sum()
        w = nxt
        if err < tol:
            return w / w.sum()
    raise ConvergenceError(f"walk did not converge within max_iter={max_iter} iterations")


def local_mixing_matrix(graph: SocialGraph, attribute: str, weights: np.ndarray) -> MixingMatrix:
    """``e_gh = sum_i (w_i / deg_i) sum_{j in N(i)} W_ij [c_i = g][c_j = h]`` for node weights ``w``."""
    categories, codes = _codes(graph, attribute)
    w = graph.symmetrized(weighted=True).tocoo()
    deg = np.asarray(graph.symmetrized(weighted=True).sum(axis=1)).ravel()
    scale = np.divide(weights, deg, out=np.zeros_like(deg, dtype=float), where=deg > 0)
    e = np.zeros((len(categories), len(categories)))
    np.add.at(e, (codes[w.row], codes[w.col]), scale[w.row] * w.data)
    return MixingMatrix(e, categories)


def same_label_share(graph: SocialGraph, attribute: str) -> np.ndarray:
    """For each node, the weighted fraction of its neighbors sharing its category."""
    _, codes = _codes(graph, attribute)
    w = graph.symmetrized(weighted=True).tocoo()
    same = np.zeros(graph.n_nodes)
    np.add.at(same, w.row, w.data * (codes[w.row] == codes[w.col]))
    deg = np.asarray(graph.symmetrized(weighted=True).sum(axis=1)).ravel()
    return np.divide(same, deg, out=np.zeros_like(same), where=deg > 0)


def _walk_average(p, values, alpha, tol=WALK_TOL, max_iter=200_000):
    """``x = (1 - alpha) (I - alpha P)^-1 values``, i.e. ``x_l = w_l . values`` for every start ``l``."""
    if alpha == 0.0:
        return values.copy()
    base = (1.0 - alpha) * values
    x = values.copy()
    for _ in range(max_iter):
        nxt = alpha * (p @ x) + base
        err = np.abs(nxt - x).max()
        x = nxt
        if err < tol:
            return x
    raise ConvergenceError(f"local assortativity did not converge within max_iter={max_iter} iterations")


@dataclass
class LocalAssortativityResult:
    attribute: str
    user_ids: tuple
    alpha_grid: tuple
    per_alpha: np.ndarray  # (n_nodes, len(alpha_grid))
    scores: np.ndarray
    global_r: Optional[float]
    chance: float
    categories: tuple

    def config(self):
        return {"attribute": self.attribute, "alpha_grid": list(self.alpha_grid),
                "aggregation": "mean over alpha_grid", "walk_tol": WALK_TOL,
                "graph_view": "undirected, W = A + A^T"}


def local_assortativity(graph: SocialGraph, attribute: str,
                        alpha_grid: Sequence[float] = DEFAULT_ALPHA_GRID) -> LocalAssortativityResult:
    """Multiscale local assortativity of every node.

    For start node ``l`` and restart parameter ``alpha`` the local score is
    ``(sum_g e_gg(l) - sum_g a_g b_g) / (1 - sum_g a_g b_g)`` with global
    marginals ``a, b``; the multiscale score is the mean over ``alpha_grid``.
    Only the trace of each local mixing matrix enters the score, and the
    trace is ``w_l . s`` with ``s`` the same-category neighbor share, so one
    walk-averaging solve per ``alpha`` covers all nodes.
    """
    alpha_grid = tuple(float(a) for a in alpha_grid)
    if not alpha_grid:
        raise ValidationError("alpha_grid is empty")
    for a in alpha_grid:
        _check_alpha(a)
    glob = mixing_matrix(graph, attribute, undirected=True)
    chance = glob.chance
    if np.isclose(chance, 1.0, rtol=0.0, atol=1e-15):
        raise ValidationError(f"attribute {attribute!r} has a single category; assortativity undefined")
    p, _ = transition_matrix(graph)
    s = same_label_share(graph, attribute)
    per_alpha = np.empty((graph.n_nodes, len(alpha_grid)))
    for j, a in enumerate(alpha_grid):
        per_alpha[:, j] = (_walk_average(p, s, a) - chance) / (1.0 - chance)
    return LocalAssortativityResult(
        attribute=attribute, user_ids=graph.user_ids, alpha_grid=alpha_grid,
        per_alpha=per_alpha, scores=per_alpha.mean(axis=1), global_r=glob.coefficient(),
        chance=chance, categories=glob.categories)


def assortativity_histograms(result: LocalAssortativityResult, status_labels, bins=20,
                             groups=("Migrant", "Native")):
    """Per-group counts of local scores over one shared bin grid (stacked-plot data)."""
    scores = np.asarray(result.scores)
    status_labels = np.asarray(status_labels, dtype=object)
    if len(scores):
        lo, hi = float(scores.min()), float(scores.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
    else:
        lo, hi = 0.0, 1.0
    edges = np.linspace(lo, hi, bins + 1)
    out = {"attribute": result.attribute, "edges": edges.tolist(), "groups": {}}
    for g in groups:
        counts, _ = np.histogram(scores[status_labels == g], bins=edges)
        out["groups"][g] = {"counts": counts.tolist(), "n": int((status_labels == g).sum())}
    return out
