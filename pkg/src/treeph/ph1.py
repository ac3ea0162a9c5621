"""One-dimensional persistence of a point-cloud thickening (Vietoris-Rips).

The thickening is modelled by the Rips complex with the radius convention:
an edge ``(u, v)`` enters at scale ``|u - v| / 2`` and a triangle at the
largest scale of its three edges.  Simplices are totally ordered by
``(scale, dimension, vertex tuple)``.  All arithmetic is over GF(2).

Two reductions produce the same pairing:

``"homology"``
    Column reduction of the boundary matrix, triangles first so that the
    edges they kill can be cleared before the edge columns are reduced.
``"cohomology"``
    Column reduction of the anti-transposed coboundary matrix.  Edges that
    kill a component (the spanning-forest edges) are cleared up front, and
    coboundaries are generated on demand, so the triangle list is never
    materialised.  This is the default; it is much faster on real clouds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .diagram import PersistenceDiagram
from .treeio import EmbeddedTree, PointCloud, subsample


def default_max_scale(points) -> float:
    """Half the diagonal of the bounding box of ``points``."""
    pts = np.asarray(points, dtype=float)
    pts = pts.reshape(len(pts), -1)
    diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    return diag / 2 if diag > 0 else 1.0


@dataclass
class RipsFiltration:
    """Rips complex up to triangles, with simplices in filtration order.

    ``edges`` is (E, 2) with ``i < j``; ``triangles`` is (T, 3) with
    ``i < j < k``.  Both are sorted by (scale, vertex tuple); vertices all
    sit at scale 0 and precede every edge.
    """

    n_points: int
    edges: np.ndarray
    edge_scales: np.ndarray
    max_scale: float
    dist: np.ndarray
    _triangles: tuple | None = None

    @property
    def triangles(self):
        if self._triangles is None:
            self._triangles = _flag_triangles(self)
        return self._triangles[0]

    @property
    def triangle_scales(self):
        if self._triangles is None:
            self._triangles = _flag_triangles(self)
        return self._triangles[1]

    def simplices(self):
        """All simplices as (scale, dim, vertex tuple), in filtration order."""
        out = [(0.0, 0, (v,)) for v in range(self.n_points)]
        out += [(float(s), 1, tuple(e)) for e, s in zip(self.edges.tolist(), self.edge_scales)]
        out += [(float(s), 2, tuple(t)) for t, s in zip(self.triangles.tolist(), self.triangle_scales)]
        return sorted(out)


def build_rips(cloud, max_scale: float | None = None) -> RipsFiltration:
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    pts = pts.reshape(len(pts), -1)
    if len(pts) == 0:
        raise ValueError("point cloud is empty")
    if max_scale is None:
        max_scale = default_max_scale(pts)
    if not max_scale > 0:
        raise ValueError("max_scale must be positive")
    n = len(pts)
    dist = squareform(pdist(pts)) if n > 1 else np.zeros((1, 1))
    iu, ju = np.triu_indices(n, k=1)
    scales = dist[iu, ju] / 2
    keep = scales <= max_scale
    iu, ju, scales = iu[keep], ju[keep], scales[keep]
    order = np.lexsort((ju, iu, scales))
    edges = np.column_stack([iu[order], ju[order]]).astype(np.int64)
    return RipsFiltration(n, edges, scales[order], float(max_scale), dist)


def _flag_triangles(filt):
    """Enumerate every 3-clique of the edge graph with its scale."""
    n = filt.n_points
    adj = np.zeros((n, n), dtype=bool)
    if len(filt.edges):
        adj[filt.edges[:, 0], filt.edges[:, 1]] = True
    adj |= adj.T
    tris = []
    for i, j in filt.edges.tolist():
        ks = np.nonzero(adj[i] & adj[j])[0]
        ks = ks[ks > j]
        if len(ks):
            tris.append(np.column_stack([np.full(len(ks), i), np.full(len(ks), j), ks]))
    if not tris:
        return np.empty((0, 3), dtype=np.int64), np.empty(0)
    tri = np.concatenate(tris).astype(np.int64)
    d = filt.dist
    sc = np.maximum.reduce([d[tri[:, 0], tri[:, 1]], d[tri[:, 0], tri[:, 2]], d[tri[:, 1], tri[:, 2]]]) / 2
    order = np.lexsort((tri[:, 2], tri[:, 1], tri[:, 0], sc))
    return tri[order], sc[order]


def persistence1(filt: RipsFiltration, method: str = "cohomology") -> PersistenceDiagram:
    """Dgm_1 of the Rips filtration.

    Cycles still alive at ``filt.max_scale`` get death ``inf`` and the
    diagram is flagged ``truncated``.  Zero-persistence pairs are dropped.
    """
    if method == "cohomology":
        pairs, essential = _reduce_cohomology(filt)
    elif method == "homology":
        pairs, essential = _reduce_homology(filt)
    else:
        raise ValueError(f"unknown method {method!r}")
    dots = [(b, d) for b, d in pairs if d > b]
    dots += [(b, math.inf) for b in essential]
    return PersistenceDiagram(
        np.array(dots).reshape(-1, 2), dim=1, truncated=bool(essential), max_scale=filt.max_scale
    )


def _spanning_forest_mask(n, edges):
    """True for edges that merge two components when added in order."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    mask = np.zeros(len(edges), dtype=bool)
    for k, (a, b) in enumerate(edges.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
            mask[k] = True
    return mask


def _reduce_homology(filt):
    """Boundary-matrix reduction with clearing; columns are int bitsets."""
    n, E = filt.n_points, len(filt.edges)
    tris = filt.triangles
    eidx = {(int(a), int(b)): n + k for k, (a, b) in enumerate(filt.edges.tolist())}
    # row index of a simplex == its position in the filtration order
    pivot_owner: dict[int, int] = {}
    pairs = []
    for t, (i, j, k) in enumerate(tris.tolist()):
        col = (1 << eidx[(i, j)]) | (1 << eidx[(i, k)]) | (1 << eidx[(j, k)])
        while col:
            low = col.bit_length() - 1
            other = pivot_owner.get(low)
            if other is None:
                pivot_owner[low] = col
                pairs.append((float(filt.edge_scales[low - n]), float(filt.triangle_scales[t])))
                break
            col ^= other
    killed = set(pivot_owner)
    # edge columns: cleared if paired with a triangle, otherwise reduce
    vpivot: dict[int, int] = {}
    essential = []
    for k, (a, b) in enumerate(filt.edges.tolist()):
        row = n + k
        if row in killed:
            continue
        col = (1 << a) | (1 << b)
        while col:
            low = col.bit_length() - 1
            other = vpivot.get(low)
            if other is None:
                vpivot[low] = col
                break
            col ^= other
        if not col:
            essential.append(float(filt.edge_scales[k]))
    return pairs, essential


def _reduce_cohomology(filt):
    n = filt.n_points
    edges, escale = filt.edges, filt.edge_scales
    E = len(edges)
    if E == 0:
        return [], []
    # integer key per triangle that sorts in filtration order:
    # (scale rank, i, j, k) packed base n
    uniq, srank = np.unique(escale, return_inverse=True)
    if len(uniq) * n**3 >= 2**62:
        raise ValueError("cloud too large for packed triangle keys")
    rank_of = np.full((n, n), -1, dtype=np.int64)
    rank_of[edges[:, 0], edges[:, 1]] = srank
    rank_of[edges[:, 1], edges[:, 0]] = srank
    present = rank_of >= 0
    n2, n3 = n * n, n * n * n

    def coboundary(a, b, r):
        ks = np.nonzero(present[a] & present[b])[0]
        if not len(ks):
            return ks
        tr = np.maximum(np.maximum(rank_of[a, ks], rank_of[b, ks]), r)
        lo = np.minimum(np.minimum(a, b), ks)
        hi = np.maximum(np.maximum(a, b), ks)
        mid = a + b + ks - lo - hi
        keys = tr * n3 + lo * n2 + mid * n + hi
        keys.sort()
        return keys

    forest = _spanning_forest_mask(n, edges)
    first = _first_cofacets(edges, srank, rank_of, present, n)
    # a pivot owner is an edge id until its column is needed, then the column
    pivot_owner: dict[int, object] = {}
    pairs, essential = [], []
    for e in range(E - 1, -1, -1):
        if forest[e]:
            continue
        piv = int(first[e])
        if piv < 0:
            essential.append(float(escale[e]))
            continue
        if piv not in pivot_owner:
            # the usual case: the smallest cofacet is a fresh pivot
            pivot_owner[piv] = e
            pairs.append((float(escale[e]), float(uniq[piv // n3])))
            continue
        a, b = int(edges[e, 0]), int(edges[e, 1])
        col = coboundary(a, b, int(srank[e]))
        while len(col):
            piv = int(col[0])
            other = pivot_owner.get(piv)
            if other is None:
                pivot_owner[piv] = col
                pairs.append((float(escale[e]), float(uniq[piv // n3])))
                break
            if not isinstance(other, np.ndarray):
                oa, ob = int(edges[other, 0]), int(edges[other, 1])
                other = pivot_owner[piv] = coboundary(oa, ob, int(srank[other]))
            col = np.setxor1d(col, other, assume_unique=True)
        if not len(col):
            essential.append(float(escale[e]))
    return pairs, essential


def _first_cofacets(edges, srank, rank_of, present, n, chunk=2048):
    """Smallest packed triangle key in each edge's coboundary (-1 if empty)."""
    n2, n3 = n * n, n * n * n
    ks = np.arange(n, dtype=np.int64)
    out = np.empty(len(edges), dtype=np.int64)
    big = np.iinfo(np.int64).max
    for s in range(0, len(edges), chunk):
        a = edges[s:s + chunk, 0][:, None]
        b = edges[s:s + chunk, 1][:, None]
        mask = present[a[:, 0]] & present[b[:, 0]]
        tr = np.maximum(np.maximum(rank_of[a[:, 0]], rank_of[b[:, 0]]), srank[s:s + chunk, None])
        lo = np.minimum(a, ks)  # a < b always
        hi = np.maximum(b, ks)
        mid = a + b + ks - lo - hi
        keys = np.where(mask, tr * n3 + lo * n2 + mid * n + hi, big)
        m = keys.min(axis=1)
        m[m == big] = -1
        out[s:s + chunk] = m
    return out


def tree_loops(tree: EmbeddedTree, m: int, max_scale: float | None = None, seed: int = 0,
               method: str = "cohomology") -> PersistenceDiagram:
    """Subsample ``tree`` to ``m`` points and return Dgm_1 of the Rips thickening."""
    cloud = subsample(tree, m, seed)
    return persistence1(build_rips(cloud, max_scale), method=method)
