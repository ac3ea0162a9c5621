"""Distances between persistence diagrams and between point clouds.

Diagram distances optimise over bijections in which any dot may instead
be sent to its nearest point on the diagonal.  For ``n`` and ``m`` finite
dots this is a square assignment problem of size ``n + m``: the upper-left
block pairs real dots, the off-diagonal blocks send a dot to the diagonal,
and the lower-right block pairs diagonal copies at zero cost.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial.distance import cdist

from .diagram import PersistenceDiagram
from .errors import InfiniteDistanceError
from .hungarian import linear_assignment
from .treeio import PointCloud


@dataclass(frozen=True)
class MatchingCost:
    """Outer exponent ``p`` and planar ground norm for diagram matching."""

    p: float = 1.0
    ground_norm: float = math.inf

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("p must be >= 1")
        if not self.ground_norm >= 1:
            raise ValueError("ground_norm must be >= 1")


def _as_dots(d):
    if isinstance(d, PersistenceDiagram):
        return d.dots
    return np.asarray(d, dtype=float).reshape(-1, 2)


def _split(d):
    dots = _as_dots(d)
    fin = np.isfinite(dots[:, 1])
    return dots[fin], np.sort(dots[~fin, 0])


def _ground(a, b, q):
    if q == math.inf:
        return cdist(a, b, "chebyshev")
    if q == 1:
        return cdist(a, b, "cityblock")
    return cdist(a, b, "minkowski", p=q)


def _to_diagonal(dots, q):
    # the closest diagonal point is the midpoint ((b+d)/2, (b+d)/2) for every l_q
    half = (dots[:, 1] - dots[:, 0]) / 2
    return half if q == math.inf else half * 2 ** (1 / q)


def augmented_cost(D1, D2, ground_norm=math.inf):
    """The (n+m) x (n+m) ground-cost matrix over finite dots and diagonal slots."""
    X, Y = _as_dots(D1), _as_dots(D2)
    n, m = len(X), len(Y)
    C = np.zeros((n + m, n + m))
    if n and m:
        C[:n, :m] = _ground(X, Y, ground_norm)
    if n:
        C[:n, m:] = np.inf
        C[np.arange(n), m + np.arange(n)] = _to_diagonal(X, ground_norm)
    if m:
        C[n:, :m] = np.inf
        C[n + np.arange(m), np.arange(m)] = _to_diagonal(Y, ground_norm)
    return C


def _essential_costs(e1, e2):
    if len(e1) != len(e2):
        raise InfiniteDistanceError(
            f"diagrams have {len(e1)} and {len(e2)} essential dots; distance is infinite"
        )
    return np.abs(e1 - e2)


def wasserstein(D1, D2, cost: MatchingCost | float = MatchingCost(), matching=False):
    """Exact p-Wasserstein distance ``(sum of ground_cost**p) ** (1/p)``.

    ``cost`` may be a :class:`MatchingCost` or a bare ``p``.  Essential dots
    are matched to each other by sorted birth.  With ``matching=True`` the
    optimal pairs of finite-dot indices are returned too, ``-1`` marking the
    diagonal.
    """
    if not isinstance(cost, MatchingCost):
        cost = MatchingCost(p=float(cost))
    if cost.p == math.inf:
        return bottleneck(D1, D2, ground_norm=cost.ground_norm)
    (X, e1), (Y, e2) = _split(D1), _split(D2)
    ess = _essential_costs(e1, e2)
    p = cost.p
    C = augmented_cost(X, Y, cost.ground_norm)
    rows, cols = linear_assignment(C ** p)
    total = float(np.sum(C[rows, cols] ** p) + np.sum(ess ** p))
    dist = total ** (1 / p)
    if not matching:
        return dist
    n, m = len(X), len(Y)
    pairs = []
    for r, c in zip(rows.tolist(), cols.tolist()):
        if r < n:
            pairs.append((r, c if c < m else -1))
        elif c < m:
            pairs.append((-1, c))
    return dist, pairs


def _feasible(C, t):
    adj = csr_matrix((C <= t).astype(np.int8))
    match = maximum_bipartite_matching(adj, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck(D1, D2, ground_norm=math.inf):
    """Exact bottleneck distance: the smallest ``t`` admitting a perfect matching
    of cost-``<= t`` edges, found by binary search over the candidate costs."""
    (X, e1), (Y, e2) = _split(D1), _split(D2)
    ess = _essential_costs(e1, e2)
    floor = float(ess.max()) if len(ess) else 0.0
    C = augmented_cost(X, Y, ground_norm)
    if C.size == 0:
        return floor
    cand = np.unique(C[np.isfinite(C)])
    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(C, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(float(cand[lo]), floor)


def hausdorff(Y, Y2, chunk=2048) -> float:
    """Hausdorff distance between two finite point sets (Euclidean)."""
    A = Y.points if isinstance(Y, PointCloud) else np.asarray(Y, dtype=float)
    B = Y2.points if isinstance(Y2, PointCloud) else np.asarray(Y2, dtype=float)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("hausdorff distance needs non-empty point sets")
    A = A.reshape(len(A), -1)
    B = B.reshape(len(B), -1)
    return max(_directed(A, B, chunk), _directed(B, A, chunk))


def _directed(A, B, chunk):
    worst = 0.0
    for s in range(0, len(A), chunk):
        d = cdist(A[s:s + chunk], B).min(axis=1)
        worst = max(worst, float(d.max()))
    return worst
