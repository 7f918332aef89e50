"""Unweighted undirected k-nearest-neighbor graph construction and diagnostics."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .io_formats import FeatureMatrix

# Rows per distance block: keeps the pairwise-distance working set at
# block_size * n doubles regardless of n.
_BLOCK_ROWS = 256


@dataclass
class Graph:
    """Adjacency over n nodes: per-node sorted neighbor arrays, symmetric, loop-free."""

    n: int
    neighbors: list[np.ndarray]
    _csr: tuple[np.ndarray, np.ndarray] | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if len(self.neighbors) != self.n:
            raise ValueError(f"{len(self.neighbors)} adjacency lists for n={self.n}")
        self.neighbors = [np.asarray(a, dtype=np.int64) for a in self.neighbors]
        edge_set = set()
        for i, adj in enumerate(self.neighbors):
            if adj.size and (np.any(np.diff(adj) <= 0) or adj[0] < 0 or adj[-1] >= self.n):
                raise ValueError(f"node {i}: neighbors must be sorted, unique, in range")
            if np.any(adj == i):
                raise ValueError(f"node {i}: self-loop")
            edge_set.update((i, int(j)) for j in adj)
        for i, j in edge_set:
            if (j, i) not in edge_set:
                raise ValueError(f"asymmetric edge {i}->{j}")

    @property
    def degrees(self) -> np.ndarray:
        return np.array([a.size for a in self.neighbors], dtype=np.int64)

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (indptr, indices) view of the adjacency, cached."""
        if self._csr is None:
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum([a.size for a in self.neighbors], out=indptr[1:])
            indices = np.concatenate(self.neighbors).astype(np.int64)
            self._csr = (indptr, indices)
        return self._csr


@dataclass
class GraphDiagnostics:
    degree_min: int
    degree_mean: float
    degree_max: int
    component_count: int
    component_sizes: list[int] = field(default_factory=list)


def build_knn_graph(Z: FeatureMatrix, k: int) -> Graph:
    """Link each row to its k nearest neighbors (squared Euclidean), then symmetrize.

    Directed selections are unioned, so an edge exists if either endpoint picks
    the other and every node ends with degree >= 1. Distance ties break by
    ascending node index, which makes the graph deterministic.
    """
    vals = Z.values
    n = vals.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 rows, got {n}")
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")

    adjacency: list[set[int]] = [set() for _ in range(n)]
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        dists = cdist(vals[start:stop], vals, metric="sqeuclidean")
        for i in range(start, stop):
            row = dists[i - start]
            row[i] = np.inf  # exclude self
            # stable sort: equal distances resolve to the lower node index
            chosen = np.argsort(row, kind="stable")[:k]
            for j in chosen:
                adjacency[i].add(int(j))
                adjacency[int(j)].add(i)

    neighbors = [np.array(sorted(s), dtype=np.int64) for s in adjacency]
    return Graph(n, neighbors)


def graph_diagnostics(g: Graph) -> GraphDiagnostics:
    """Degree summary plus exact connected-component decomposition (BFS)."""
    degrees = g.degrees
    seen = np.zeros(g.n, dtype=bool)
    sizes = []
    for root in range(g.n):
        if seen[root]:
            continue
        size = 0
        queue = deque([root])
        seen[root] = True
        while queue:
            u = queue.popleft()
            size += 1
            for v in g.neighbors[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(int(v))
        sizes.append(size)
    sizes.sort(reverse=True)
    return GraphDiagnostics(
        degree_min=int(degrees.min()),
        degree_mean=float(degrees.mean()),
        degree_max=int(degrees.max()),
        component_count=len(sizes),
        component_sizes=sizes,
    )


def connected_components(g: Graph) -> np.ndarray:
    """Per-node component id (0-based, in order of first discovery)."""
    comp = np.full(g.n, -1, dtype=np.int64)
    current = 0
    for root in range(g.n):
        if comp[root] >= 0:
            continue
        queue = deque([root])
        comp[root] = current
        while queue:
            u = queue.popleft()
            for v in g.neighbors[u]:
                if comp[v] < 0:
                    comp[v] = current
                    queue.append(int(v))
        current += 1
    return comp


def dump_adjacency(g: Graph, fh, ids: list[str] | None = None) -> None:
    """Debug dump, one line per node: ``id: n1 n2 n3 ...`` (not round-tripped)."""
    names = ids if ids is not None else [str(i) for i in range(g.n)]
    for i in range(g.n):
        fh.write(f"{names[i]}: {' '.join(names[int(j)] for j in g.neighbors[i])}\n")
