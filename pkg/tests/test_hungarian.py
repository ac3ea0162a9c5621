import itertools

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from treeph.hungarian import linear_assignment


def brute_force(C):
    n = len(C)
    return min(sum(C[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def test_small_matrices_against_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        C = rng.uniform(0, 10, size=(n, n))
        if rng.random() < 0.3:
            C = np.round(C)  # plenty of ties
        rows, cols = linear_assignment(C)
        assert sorted(rows.tolist()) == list(range(n))
        assert sorted(cols.tolist()) == list(range(n))
        assert C[rows, cols].sum() == pytest.approx(brute_force(C), abs=1e-9)


def test_larger_matrices_against_scipy():
    rng = np.random.default_rng(1)
    for n in (10, 40, 120):
        C = rng.exponential(size=(n, n))
        rows, cols = linear_assignment(C)
        r2, c2 = linear_sum_assignment(C)
        assert C[rows, cols].sum() == pytest.approx(C[r2, c2].sum(), rel=1e-12)


def test_forbidden_entries_avoided():
    C = np.array([[np.inf, 1.0], [2.0, np.inf]])
    rows, cols = linear_assignment(C)
    assert dict(zip(rows.tolist(), cols.tolist())) == {0: 1, 1: 0}


def test_empty():
    rows, cols = linear_assignment(np.zeros((0, 0)))
    assert len(rows) == 0 and len(cols) == 0
