import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exhaustive_bottleneck, exhaustive_wasserstein, hausdorff_loops
from treeph.diagmetrics import MatchingCost, bottleneck, hausdorff, wasserstein
from treeph.diagram import PersistenceDiagram
from treeph.errors import InfiniteDistanceError


def diag(dots, dim=0):
    return PersistenceDiagram(np.array(dots, dtype=float).reshape(-1, 2), dim=dim)


def random_dots(rng, k_max=5):
    k = int(rng.integers(0, k_max + 1))
    b = rng.uniform(0, 10, size=k)
    return np.column_stack([b, b + rng.uniform(0.01, 5, size=k)])


def test_identity_is_zero():
    d = diag([(0, 2), (1, 5), (3, np.inf)])
    assert wasserstein(d, d) == 0
    assert bottleneck(d, d) == 0


def test_single_dot_to_empty():
    assert wasserstein(diag([(0, 2)]), diag([])) == 1.0


def test_direct_match_beats_diagonal():
    assert wasserstein(diag([(0, 2)]), diag([(0, 3)])) == 1.0


def test_bottleneck_shifted_birth():
    assert bottleneck(diag([(0, 4)]), diag([(1, 4)])) == 1.0


def test_extra_low_persistence_dots():
    base = np.array([(0, 10), (2, 7), (4, 6)], dtype=float)
    extra = np.array([(5, 5.4), (6, 6.2), (1, 1.6)])
    a, b = diag(base), diag(np.vstack([base, extra]))
    bound = (extra[:, 1] - extra[:, 0]).max() / 2
    assert bottleneck(a, b) <= bound + 1e-12
    assert bottleneck(a, b) == pytest.approx(exhaustive_bottleneck(base, np.vstack([base, extra])))


def test_wasserstein_matches_enumeration():
    rng = np.random.default_rng(0)
    for trial in range(200):
        X, Y = random_dots(rng), random_dots(rng)
        p = [1.0, 2.0, 3.5][trial % 3]
        q = [math.inf, 2.0][trial % 2]
        got = wasserstein(X, Y, MatchingCost(p=p, ground_norm=q))
        assert abs(got - exhaustive_wasserstein(X, Y, p, q)) <= 1e-9, trial


def test_bottleneck_matches_enumeration():
    rng = np.random.default_rng(1)
    for trial in range(150):
        X, Y = random_dots(rng), random_dots(rng)
        assert abs(bottleneck(X, Y) - exhaustive_bottleneck(X, Y)) <= 1e-9, trial


def test_bare_p_and_infinite_p():
    rng = np.random.default_rng(2)
    X, Y = random_dots(rng), random_dots(rng)
    assert wasserstein(X, Y, 2) == wasserstein(X, Y, MatchingCost(p=2))
    assert wasserstein(X, Y, math.inf) == bottleneck(X, Y)


def test_bad_p_rejected():
    with pytest.raises(ValueError):
        MatchingCost(p=0.5)


def test_essential_dots():
    a = diag([(0, np.inf), (1, 2)])
    b = diag([(0.5, np.inf), (1, 2)])
    assert wasserstein(a, b) == 0.5
    assert bottleneck(a, b) == 0.5
    with pytest.raises(InfiniteDistanceError):
        wasserstein(a, diag([(1, 2)]))
    with pytest.raises(InfiniteDistanceError):
        bottleneck(a, diag([(0, np.inf), (1, np.inf)]))


def test_matching_output():
    dist, pairs = wasserstein(diag([(0, 10), (3, 3.2)]), diag([(0, 9)]), matching=True)
    assert dist == pytest.approx(1.0 + 0.1)
    assert (0, 0) in pairs and (1, -1) in pairs


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([1.0, 2.0]))
def test_symmetry_triangle_and_ordering(seed, p):
    rng = np.random.default_rng(seed)
    X, Y, Z = random_dots(rng, 6), random_dots(rng, 6), random_dots(rng, 6)
    wxy = wasserstein(X, Y, p)
    assert wxy == pytest.approx(wasserstein(Y, X, p), abs=1e-9)
    assert bottleneck(X, Y) == bottleneck(Y, X)
    assert wxy <= wasserstein(X, Z, p) + wasserstein(Z, Y, p) + 1e-9
    assert bottleneck(X, Y) <= bottleneck(X, Z) + bottleneck(Z, Y) + 1e-9
    assert bottleneck(X, Y) <= wxy + 1e-9


def test_hausdorff_examples():
    Y = np.zeros((1, 3))
    assert hausdorff(Y, Y) == 0
    assert hausdorff(Y, np.array([[0, 0, 0], [1, 0, 0]], dtype=float)) == 1.0


def test_hausdorff_matches_loops():
    rng = np.random.default_rng(3)
    for _ in range(20):
        A = rng.standard_normal((30, 3))
        B = rng.standard_normal((30, 3))
        got = hausdorff(A, B, chunk=7)
        assert got == pytest.approx(hausdorff_loops(A.tolist(), B.tolist()), rel=1e-14)
        assert got == hausdorff(B, A)


def test_hausdorff_empty_rejected():
    with pytest.raises(ValueError):
        hausdorff(np.empty((0, 3)), np.zeros((1, 3)))
