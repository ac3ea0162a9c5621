"""Zero-dimensional sublevel-set persistence of a function on a graph.

Vertices are swept in ascending order of ``(value, vertex id)``.  A vertex
with no earlier neighbour starts a component; a vertex whose earlier
neighbours lie in several components merges them, and every component but
the oldest dies at the vertex's value (elder rule).  Union-find keeps the
sweep at O(N log N) after sorting.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import PersistenceDiagram
from .treeio import EmbeddedTree


@dataclass
class VertexFiltration:
    """Real values on the vertices of a graph.

    ``edges`` index rows of ``values``; ``ids`` are the external vertex ids
    used to break ties between equal values.
    """

    values: np.ndarray
    edges: np.ndarray
    ids: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.ids is None:
            self.ids = np.arange(len(self.values), dtype=np.int64)
        self.ids = np.asarray(self.ids, dtype=np.int64)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("filtration values must be finite")
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= len(self.values)):
            raise ValueError("edge endpoint out of range")

    def edge_values(self):
        """Each edge takes the larger value of its two endpoints."""
        if not len(self.edges):
            return np.empty(0)
        return np.maximum(self.values[self.edges[:, 0]], self.values[self.edges[:, 1]])

    def order(self):
        """Vertex indices in sweep order: by value, ties by vertex id."""
        return np.lexsort((self.ids, self.values))


def height_filtration(tree: EmbeddedTree, direction=(0.0, 0.0, 1.0)) -> VertexFiltration:
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d)
    if d.shape != (3,) or norm == 0 or not np.isfinite(norm):
        raise ValueError("direction must be a non-zero 3-vector")
    return VertexFiltration(tree.positions @ (d / norm), tree.edge_index_array(), tree.ids)


def persistence0(filtration: VertexFiltration) -> PersistenceDiagram:
    values = filtration.values
    n = len(values)
    order = filtration.order()
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)

    nbrs = [[] for _ in range(n)]
    for a, b in filtration.edges.tolist():
        nbrs[a].append(b)
        nbrs[b].append(a)

    # parent pointers; each root remembers the rank of its oldest vertex
    parent = list(range(n))
    oldest = rank.tolist()

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    dots = []
    seen = [False] * n
    for v in order.tolist():
        seen[v] = True
        roots = {find(w) for w in nbrs[v] if seen[w] and w != v}
        if not roots:
            continue
        elder = min(roots, key=oldest.__getitem__)
        h = values[v]
        for r in roots:
            if r == elder:
                continue
            birth = values[order[oldest[r]]]
            if h > birth:
                dots.append((birth, h))
            parent[r] = elder
        parent[v] = elder

    for v in range(n):
        if find(v) == v:
            dots.append((values[order[oldest[v]]], np.inf))
    return PersistenceDiagram(np.array(dots).reshape(-1, 2), dim=0)


def tree_components(tree: EmbeddedTree, direction=(0.0, 0.0, 1.0)) -> PersistenceDiagram:
    """Dgm_0 of the height function of ``tree`` along ``direction``."""
    return persistence0(height_filtration(tree, direction))
