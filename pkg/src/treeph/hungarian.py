"""Minimum-cost perfect matching on a square cost matrix.

Shortest-augmenting-path form of the Hungarian method with row and column
potentials, O(n^3).  Rows are inserted one at a time; each insertion runs a
Dijkstra-like scan over reduced costs and flips the alternating path it
finds.
"""
import numpy as np


def linear_assignment(cost):
    """Return ``(rows, cols)`` of an optimal assignment for a square ``cost``.

    Entries may be ``inf`` as long as some finite perfect matching exists.
    """
    C = np.asarray(cost, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("cost matrix must be square")
    n = C.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    finite = C[np.isfinite(C)]
    big = (np.abs(finite).max() + 1.0) * (n + 1) if finite.size else 1.0
    C = np.where(np.isfinite(C), C, big)

    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row matched to column j (1-based, 0 = free)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = C[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    rows = p[1:] - 1
    cols = np.arange(n)
    order = np.argsort(rows)
    return rows[order], cols[order]
