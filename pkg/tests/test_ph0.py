import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixtures import WORKED_DOTS, worked_filtration, random_graph
from oracles import threshold_sweep_dgm0
from treeph.diagmetrics import bottleneck
from treeph.ph0 import VertexFiltration, height_filtration, persistence0, tree_components
from treeph.treeio import EmbeddedTree, parse_tree


def dots(d):
    return sorted(map(tuple, d.dots.tolist()))


def test_height_along_axes():
    tree = EmbeddedTree([0, 1], [[3, 4, 5], [0, 0, 0]], [(0, 1)])
    assert height_filtration(tree).values[0] == 5
    assert height_filtration(tree, (1, 0, 0)).values[0] == 3
    assert height_filtration(tree, (0, 0, 2)).values[0] == 5


def test_zero_direction_rejected():
    tree = EmbeddedTree([0, 1], [[0, 0, 0], [1, 1, 1]], [(0, 1)])
    with pytest.raises(ValueError):
        height_filtration(tree, (0, 0, 0))


def test_edge_value_is_max():
    f = VertexFiltration([1.0, 7.0], [(0, 1)])
    assert f.edge_values().tolist() == [7.0]


def test_worked_graph_fixture():
    assert dots(persistence0(worked_filtration())) == WORKED_DOTS


def test_three_vertex_path():
    f = VertexFiltration([0.0, 2.0, 1.0], [(0, 1), (1, 2)])
    assert dots(persistence0(f)) == [(0.0, np.inf), (1.0, 2.0)]


def test_tree_components_reads_height():
    tree = parse_tree("v 0 0 0 0\nv 1 0 0 2\nv 2 0 0 1\ne 0 1\ne 1 2\n")
    assert dots(tree_components(tree)) == [(0.0, np.inf), (1.0, 2.0)]


def test_matches_threshold_sweep_oracle():
    rng = np.random.default_rng(20)
    for trial in range(200):
        values, edges = random_graph(rng, integer_heights=trial % 2 == 1)
        got = dots(persistence0(VertexFiltration(values, edges)))
        assert got == threshold_sweep_dgm0(values.tolist(), edges), trial


def test_one_essential_dot_per_component():
    rng = np.random.default_rng(4)
    for _ in range(50):
        values, edges = random_graph(rng)
        n = len(values)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for a, b in edges:
            parent[find(a)] = find(b)
        components = len({find(v) for v in range(n)})
        d = persistence0(VertexFiltration(values, edges))
        assert len(d.essential()) == components
        assert np.all(d.finite().dots[:, 1] > d.finite().dots[:, 0])


def test_dot_count_equals_local_minima():
    rng = np.random.default_rng(6)
    for _ in range(50):
        values, edges = random_graph(rng)
        key = [(values[v], v) for v in range(len(values))]
        has_lower = set()
        for a, b in edges:
            has_lower.add(a if key[b] < key[a] else b)
        minima = len(values) - len(has_lower)
        assert len(persistence0(VertexFiltration(values, edges))) == minima


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-100, 100), st.floats(0.01, 100))
def test_translation_and_scaling(seed, c, lam):
    rng = np.random.default_rng(seed)
    values, edges = random_graph(rng, 30)
    base = persistence0(VertexFiltration(values, edges)).sorted().dots
    shifted = persistence0(VertexFiltration(values + c, edges)).sorted().dots
    assert sorted(map(tuple, shifted.tolist())) == sorted(map(tuple, (base + c).tolist()))
    scaled = persistence0(VertexFiltration(values * lam, edges)).sorted().dots
    assert sorted(map(tuple, scaled.tolist())) == sorted(map(tuple, (base * lam).tolist()))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_vertex_order_independence(seed):
    rng = np.random.default_rng(seed)
    values, edges = random_graph(rng, 40)
    perm = rng.permutation(len(values))
    inv = np.argsort(perm)
    moved_values = values[perm]
    moved_edges = [(int(inv[a]), int(inv[b])) for a, b in edges]
    a = dots(persistence0(VertexFiltration(values, edges)))
    b = dots(persistence0(VertexFiltration(moved_values, moved_edges)))
    assert a == b


def test_stability_under_perturbation():
    rng = np.random.default_rng(7)
    for _ in range(100):
        values, edges = random_graph(rng, 40)
        g = values + rng.uniform(-0.5, 0.5, size=len(values))
        d = bottleneck(persistence0(VertexFiltration(values, edges)),
                       persistence0(VertexFiltration(g, edges)))
        assert d <= np.max(np.abs(values - g)) + 1e-9


def test_tie_breaking_by_id():
    # equal heights: the lower id is older and survives
    f = VertexFiltration([1.0, 1.0, 2.0], [(0, 2), (1, 2)], ids=[5, 3, 0])
    d = persistence0(f)
    assert dots(d) == [(1.0, 2.0), (1.0, np.inf)]
