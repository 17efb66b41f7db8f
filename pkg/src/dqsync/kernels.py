"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The simulator spends almost all of its time recomputing terminal-to-terminal
minimum path costs after every topology rewire, so that batch Dijkstra (and
the connected-components pass used by rewire repair) are compiled with numba
when available. Set ``DQSYNC_PURE_NUMPY=1`` to force the numpy fallback;
``benchmarks/kernel_bench.py`` times the two backends side by side.

Graphs are passed in CSR form: ``indptr`` (n+1 int64), ``indices`` (int64
neighbor ids), ``weights`` (float64, parallel to ``indices``). Both backends
return bit-identical results whenever edge weights are exactly representable
(integer weight sets in particular).
"""

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("DQSYNC_PURE_NUMPY", "").strip() not in ("", "0")

if not _FORCE_NUMPY:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False


def backend() -> str:
    """Name of the active kernel backend, "numba" or "numpy"."""
    return "numba" if _HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy fallback implementations
# ---------------------------------------------------------------------------

def _dists_numpy(indptr, indices, weights, sources, n):
    # Vectorized Bellman-Ford relaxation; terminates within graph diameter
    # iterations because all weights are nonnegative.
    ns = sources.shape[0]
    dist = np.full((n, ns), np.inf)
    dist[sources, np.arange(ns)] = 0.0
    if indices.size == 0:
        return dist.T.copy()
    us = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    w = weights[:, None]
    while True:
        new = dist.copy()
        np.minimum.at(new, indices, dist[us] + w)
        if np.array_equal(new, dist):
            return new.T.copy()
        dist = new


def _components_numpy(indptr, indices, n):
    # Min-label propagation: every node converges to the smallest node id in
    # its component, matching the numba BFS labeling exactly.
    labels = np.arange(n, dtype=np.int64)
    if indices.size == 0:
        return labels
    us = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    while True:
        new = labels.copy()
        np.minimum.at(new, indices, labels[us])
        if np.array_equal(new, labels):
            return labels
        labels = new


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:

    @njit(cache=True)
    def _dists_numba(indptr, indices, weights, sources, n):
        ns = sources.shape[0]
        out = np.empty((ns, n), dtype=np.float64)
        cap = indices.shape[0] + n + 2
        heap_d = np.empty(cap, dtype=np.float64)
        heap_v = np.empty(cap, dtype=np.int64)
        dist = np.empty(n, dtype=np.float64)
        for si in range(ns):
            for i in range(n):
                dist[i] = np.inf
            src = sources[si]
            dist[src] = 0.0
            heap_d[0] = 0.0
            heap_v[0] = src
            size = 1
            while size > 0:
                d = heap_d[0]
                v = heap_v[0]
                size -= 1
                # sift down the relocated last element
                last_d = heap_d[size]
                last_v = heap_v[size]
                i = 0
                while True:
                    child = 2 * i + 1
                    if child >= size:
                        break
                    if child + 1 < size and heap_d[child + 1] < heap_d[child]:
                        child += 1
                    if heap_d[child] >= last_d:
                        break
                    heap_d[i] = heap_d[child]
                    heap_v[i] = heap_v[child]
                    i = child
                heap_d[i] = last_d
                heap_v[i] = last_v
                if d > dist[v]:
                    continue
                for e in range(indptr[v], indptr[v + 1]):
                    u = indices[e]
                    nd = d + weights[e]
                    if nd < dist[u]:
                        dist[u] = nd
                        # sift up a fresh entry
                        j = size
                        size += 1
                        while j > 0:
                            parent = (j - 1) >> 1
                            if heap_d[parent] <= nd:
                                break
                            heap_d[j] = heap_d[parent]
                            heap_v[j] = heap_v[parent]
                            j = parent
                        heap_d[j] = nd
                        heap_v[j] = u
            out[si, :] = dist
        return out

    @njit(cache=True)
    def _components_numba(indptr, indices, n):
        labels = np.full(n, -1, dtype=np.int64)
        stack = np.empty(n, dtype=np.int64)
        for root in range(n):
            if labels[root] >= 0:
                continue
            # root is the smallest id in its component: every smaller node has
            # already been visited, so the labels match the numpy fallback.
            labels[root] = root
            stack[0] = root
            top = 1
            while top > 0:
                top -= 1
                v = stack[top]
                for e in range(indptr[v], indptr[v + 1]):
                    u = indices[e]
                    if labels[u] < 0:
                        labels[u] = root
                        stack[top] = u
                        top += 1
        return labels


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def shortest_dists(indptr, indices, weights, sources, n: int) -> np.ndarray:
    """Minimum path costs from each source node to every node.

    Returns a (len(sources), n) float64 matrix; unreachable entries are inf.
    """
    sources = np.asarray(sources, dtype=np.int64)
    if _HAVE_NUMBA:
        return _dists_numba(indptr, indices, weights, sources, n)
    return _dists_numpy(indptr, indices, weights, sources, n)


def component_labels(indptr, indices, n: int) -> np.ndarray:
    """Label each node with the smallest node id in its connected component."""
    if _HAVE_NUMBA:
        return _components_numba(indptr, indices, n)
    return _components_numpy(indptr, indices, n)
