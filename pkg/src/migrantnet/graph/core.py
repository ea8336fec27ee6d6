"""Immutable directed follow graph in compressed sparse row form."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ..errors import NotFoundError, ValidationError
from ..labeling import Status, UserLabel

ATTRIBUTES = ("status", "nationality", "residence")


def _csr(n, src, dst):
    """indptr/indices for edges ``src -> dst`` with sorted, deduplicated rows."""
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    if len(src):
        keep = np.ones(len(src), dtype=bool)
        keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst = src[keep], dst[keep]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst.astype(np.int64)


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """Directed graph over labeled users.

    Nodes are ``0..n-1`` in ``user_id`` order. Out- and in-adjacency are kept
    as CSR arrays with sorted neighbor lists; ``attrs`` maps each attribute
    name in :data:`ATTRIBUTES` to a per-node array of strings.
    """

    user_ids: tuple[str, ...]
    out_indptr: np.ndarray
    out_indices: np.ndarray
    in_indptr: np.ndarray
    in_indices: np.ndarray
    attrs: Mapping[str, np.ndarray]
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_arrays(cls, user_ids, src, dst, attrs, diagnostics=None):
        n = len(user_ids)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if len(src) and (src == dst).any():
            raise ValidationError("self-loops are not allowed")
        out_ptr, out_idx = _csr(n, src, dst)
        in_ptr, in_idx = _csr(n, dst, src)
        attrs = {k: np.asarray(v, dtype=object) for k, v in attrs.items()}
        for k, v in attrs.items():
            if len(v) != n:
                raise ValidationError(f"attribute {k!r} has {len(v)} entries for {n} nodes")
        return cls(tuple(user_ids), out_ptr, out_idx, in_ptr, in_idx, attrs, diagnostics or {})

    @property
    def n_nodes(self) -> int:
        return len(self.user_ids)

    @property
    def n_edges(self) -> int:
        return len(self.out_indices)

    def index_of(self, user_id) -> int:
        try:
            return self._index[user_id]
        except AttributeError:
            object.__setattr__(self, "_index", {u: i for i, u in enumerate(self.user_ids)})
            return self.index_of(user_id)
        except KeyError:
            raise NotFoundError(f"user {user_id!r} is not in the graph") from None

    def successors(self, node: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[node]:self.out_indptr[node + 1]]

    def predecessors(self, node: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[node]:self.in_indptr[node + 1]]

    def friends(self, user_id) -> list[str]:
        return [self.user_ids[j] for j in self.successors(self.index_of(user_id))]

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int64), self.out_degree())
        return src, self.out_indices

    def adjacency(self) -> sp.csr_matrix:
        """0/1 adjacency, ``A[u, v] = 1`` iff ``u`` follows ``v``."""
        data = np.ones(self.n_edges)
        return sp.csr_matrix((data, self.out_indices, self.out_indptr),
                             shape=(self.n_nodes, self.n_nodes))

    def symmetrized(self, weighted=False) -> sp.csr_matrix:
        """Undirected view: ``A + A^T`` if ``weighted`` (mutual pairs weigh 2), else its 0/1 support."""
        a = self.adjacency()
        s = (a + a.T).tocsr()
        if not weighted:
            s.data[:] = 1.0
        s.sort_indices()
        return s

    def attribute(self, name) -> np.ndarray:
        try:
            return self.attrs[name]
        except KeyError:
            raise ValidationError(f"unknown node attribute {name!r}") from None

    def subgraph(self, nodes: Iterable[int]) -> "SocialGraph":
        """Induced subgraph on ``nodes`` (relabelled in increasing id order)."""
        nodes = np.unique(np.asarray(list(nodes), dtype=np.int64))
        remap = np.full(self.n_nodes, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        src, dst = self.edges()
        keep = (remap[src] >= 0) & (remap[dst] >= 0)
        return SocialGraph.from_arrays(
            [self.user_ids[i] for i in nodes], remap[src[keep]], remap[dst[keep]],
            {k: v[nodes] for k, v in self.attrs.items()}, dict(self.diagnostics))

    def permuted(self, perm) -> "SocialGraph":
        """Same graph with node ``i`` moved to position ``perm[i]`` (user ids follow their nodes)."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.argsort(perm)
        src, dst = self.edges()
        return SocialGraph.from_arrays(
            [self.user_ids[i] for i in inv], perm[src], perm[dst],
            {k: v[inv] for k, v in self.attrs.items()})


def graph_from_edges(n, edges, attrs=None, user_ids=None) -> SocialGraph:
    """Convenience constructor from integer edge pairs (tests, synthetic graphs)."""
    edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    user_ids = user_ids or [f"u{i:06d}" for i in range(n)]
    keep = edges[:, 0] != edges[:, 1]
    return SocialGraph.from_arrays(user_ids, edges[keep, 0], edges[keep, 1], attrs or {})


def build_graph(edges, labels: Mapping[str, UserLabel],
                keep: Iterable[Status] = (Status.MIGRANT, Status.NATIVE)) -> SocialGraph:
    """Directed graph over edges whose endpoints both carry a kept status.

    Nodes are the endpoints of kept edges. ``graph.diagnostics`` records how
    many edges were dropped and why.
    """
    keep = set(keep)
    kept_users = {u for u, l in labels.items() if l.status in keep}
    diag = Counter()
    pairs = []
    for src, dst in edges:
        if src == dst:
            diag["self_loops"] += 1
        elif src not in kept_users or dst not in kept_users:
            diag["unlabeled_endpoint"] += 1
        else:
            pairs.append((src, dst))
    unique = sorted(set(pairs))
    diag["duplicates"] += len(pairs) - len(unique)
    user_ids = sorted({u for p in unique for u in p})
    if not user_ids:
        raise ValidationError("no edge has both endpoints labeled; graph would be empty")
    index = {u: i for i, u in enumerate(user_ids)}
    src = np.fromiter((index[s] for s, _ in unique), dtype=np.int64, count=len(unique))
    dst = np.fromiter((index[d] for _, d in unique), dtype=np.int64, count=len(unique))
    attrs = {
        "status": [labels[u].status.value for u in user_ids],
        "nationality": [labels[u].nationality for u in user_ids],
        "residence": [labels[u].residence for u in user_ids],
    }
    diagnostics = {"dropped_" + k: v for k, v in sorted(diag.items())}
    return SocialGraph.from_arrays(user_ids, src, dst, attrs, diagnostics)


def weak_components(graph: SocialGraph) -> np.ndarray:
    _, comp = connected_components(graph.adjacency(), directed=True, connection="weak")
    return comp


def giant_component(graph: SocialGraph) -> SocialGraph:
    """Induced subgraph on the largest weakly connected component.

    Equal-sized components are resolved in favour of the one holding the
    smallest node id.
    """
    if graph.n_nodes == 0:
        raise ValidationError("empty graph")
    comp = weak_components(graph)
    sizes = np.bincount(comp)
    first_node = np.full(len(sizes), graph.n_nodes, dtype=np.int64)
    np.minimum.at(first_node, comp, np.arange(graph.n_nodes))
    candidates = np.flatnonzero(sizes == sizes.max())
    best = int(candidates[np.argmin(first_node[candidates])])
    nodes = np.flatnonzero(comp == best)
    if len(nodes) == graph.n_nodes:
        return graph
    return graph.subgraph(nodes)


def reciprocity(graph: SocialGraph) -> Optional[float]:
    """Fraction of edges ``u -> v`` whose reverse ``v -> u`` also exists."""
    if graph.n_edges == 0:
        return None
    a = graph.adjacency()
    return float(a.multiply(a.T).nnz / a.nnz)


def degree_sequences(graph: SocialGraph):
    """``(in, out, total)`` degree arrays."""
    ind, outd = graph.in_degree(), graph.out_degree()
    return ind, outd, ind + outd


def density(graph: SocialGraph) -> Optional[float]:
    n = graph.n_nodes
    return graph.n_edges / (n * (n - 1)) if n > 1 else None
