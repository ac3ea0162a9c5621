"""Small hand-built inputs shared by several test modules."""
import numpy as np

from treeph.ph0 import VertexFiltration

# Critical vertices A..H with heights 0, 2..8 plus four regular vertices.
# Sweeping upward: D dies into C at E, C dies into A at F, G closes a cycle
# (no dot), and B dies into A at H.
WORKED_HEIGHTS = {
    "A": 0.0, "a1": 1.0, "B": 2.0, "b1": 2.5, "C": 3.0, "D": 4.0, "c1": 4.5,
    "E": 5.0, "a2": 5.5, "F": 6.0, "G": 7.0, "H": 8.0,
}
WORKED_EDGES = [
    ("D", "E"), ("C", "c1"), ("c1", "E"), ("A", "a1"), ("a1", "a2"), ("a2", "F"),
    ("E", "F"), ("G", "F"), ("G", "a2"), ("H", "G"), ("B", "b1"), ("b1", "H"),
]
WORKED_DOTS = [(0.0, np.inf), (2.0, 8.0), (3.0, 6.0), (4.0, 5.0)]


def worked_filtration():
    names = list(WORKED_HEIGHTS)
    idx = {k: i for i, k in enumerate(names)}
    values = [WORKED_HEIGHTS[k] for k in names]
    edges = [(idx[a], idx[b]) for a, b in WORKED_EDGES]
    return VertexFiltration(values, edges)


def random_graph(rng, n_max=50, integer_heights=False):
    """Random graph: a random forest plus a few extra edges, with random heights."""
    n = int(rng.integers(1, n_max + 1))
    edges = set()
    for k in range(1, n):
        if rng.random() < 0.9:
            edges.add((int(rng.integers(k)), k))
    for _ in range(int(rng.integers(0, max(1, n // 4) + 1))):
        a, b = rng.integers(n, size=2)
        if a != b:
            edges.add((int(min(a, b)), int(max(a, b))))
    if integer_heights:
        values = rng.integers(0, 6, size=n).astype(float)
    else:
        values = rng.uniform(-5, 5, size=n)
    return values, sorted(edges)


def unit_square():
    return np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)


def regular_polygon(k, r=1.0):
    t = 2 * np.pi * np.arange(k) / k
    return np.column_stack([r * np.cos(t), r * np.sin(t), np.zeros(k)])
