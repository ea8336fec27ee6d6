"""Numba kernels for breadth-first traversals over CSR adjacency.

Brandes splits sources into a fixed number of contiguous chunks; every
chunk accumulates into its own buffer and buffers are summed in chunk order,
so floating-point results do not depend on the thread count. Distance sums
are integers and run as bit-parallel BFS over batches of 64 sources.
"""

import numpy as np
from numba import njit, prange

N_CHUNKS = 64


@njit(cache=True, nogil=True)
def _batch_distance_sums(indptr, indices, batch, reach, total, visited, frontier, nxt, planes):
    """Bit-parallel BFS from up to 64 sources at once.

    Bit ``b`` of ``visited[v]`` says source ``batch[b]`` has reached ``v``.
    Newly reached bits of each level are added into bit-sliced counters
    (``planes[j]`` holds bit ``j`` of 64 per-source counts), so the work per
    level is one pass over the frontier's edges plus one over the nodes.
    """
    n = len(indptr) - 1
    nb = len(batch)
    visited[:] = 0
    frontier[:] = 0
    nxt[:] = 0
    for b in range(nb):
        bit = np.uint64(1) << np.uint64(b)
        visited[batch[b]] |= bit
        frontier[batch[b]] |= bit
    n_planes = len(planes)
    level = 0
    while True:
        level += 1
        for v in range(n):
            f = frontier[v]
            if f != 0:
                for p in range(indptr[v], indptr[v + 1]):
                    nxt[indices[p]] |= f
        planes[:] = 0
        any_new = False
        for v in range(n):
            new = nxt[v] & ~visited[v]
            nxt[v] = 0
            frontier[v] = new
            if new != 0:
                any_new = True
                visited[v] |= new
                carry = new
                j = 0
                while carry != 0 and j < n_planes:
                    t = planes[j] & carry
                    planes[j] ^= carry
                    carry = t
                    j += 1
        if not any_new:
            break
        for b in range(nb):
            bit = np.uint64(b)
            cnt = 0
            for j in range(n_planes):
                cnt += np.int64((planes[j] >> bit) & np.uint64(1)) << j
            reach[b] += cnt
            total[b] += cnt * level


@njit(cache=True, parallel=True)
def distance_sums(indptr, indices, sources):
    """For each source: number of other nodes reached and the sum of their distances."""
    n = len(indptr) - 1
    k = len(sources)
    reach = np.zeros(k, dtype=np.int64)
    total = np.zeros(k, dtype=np.int64)
    n_batches = (k + 63) // 64
    n_planes = 1
    while (1 << n_planes) <= n:
        n_planes += 1
    for c in prange(n_batches):
        lo = c * 64
        hi = min(k, lo + 64)
        visited = np.empty(n, dtype=np.uint64)
        frontier = np.empty(n, dtype=np.uint64)
        nxt = np.empty(n, dtype=np.uint64)
        planes = np.zeros(n_planes, dtype=np.uint64)
        _batch_distance_sums(indptr, indices, sources[lo:hi], reach[lo:hi], total[lo:hi],
                             visited, frontier, nxt, planes)
    return reach, total


@njit(cache=True, parallel=True)
def brandes(indptr, indices, sources):
    """Unnormalized shortest-path betweenness summed over ``sources`` (directed, unweighted)."""
    n = len(indptr) - 1
    k = len(sources)
    n_chunks = min(N_CHUNKS, k) if k > 0 else 1
    partial = np.zeros((n_chunks, n), dtype=np.float64)
    for c in prange(n_chunks):
        dist = np.full(n, -1, dtype=np.int64)
        order = np.empty(n, dtype=np.int64)
        sigma = np.zeros(n, dtype=np.float64)
        delta = np.zeros(n, dtype=np.float64)
        acc = partial[c]
        lo = c * k // n_chunks
        hi = (c + 1) * k // n_chunks
        for i in range(lo, hi):
            s = sources[i]
            # BFS with path counting; ``order`` is the non-decreasing distance order
            dist[s] = 0
            sigma[s] = 1.0
            order[0] = s
            head, tail = 0, 1
            while head < tail:
                v = order[head]
                head += 1
                dv = dist[v] + 1
                for p in range(indptr[v], indptr[v + 1]):
                    w = indices[p]
                    if dist[w] < 0:
                        dist[w] = dv
                        order[tail] = w
                        tail += 1
                    if dist[w] == dv:
                        sigma[w] += sigma[v]
            # dependency accumulation in reverse distance order via successors
            for j in range(tail - 1, -1, -1):
                v = order[j]
                dv = dist[v] + 1
                d = 0.0
                for p in range(indptr[v], indptr[v + 1]):
                    w = indices[p]
                    if dist[w] == dv:
                        d += sigma[v] / sigma[w] * (1.0 + delta[w])
                delta[v] = d
                if v != s:
                    acc[v] += d
            for j in range(tail):
                v = order[j]
                dist[v] = -1
                sigma[v] = 0.0
                delta[v] = 0.0
    out = np.zeros(n, dtype=np.float64)
    for c in range(n_chunks):
        out += partial[c]
    return out
