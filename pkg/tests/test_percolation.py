import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mxrob.attack import AttackSpec, LayerRandom, MultiplexRandom, RemovalMask, realize
from mxrob.core import MultiplexNetwork
from mxrob.netgen import GeneratorSpec, generate_er_layer, generate_multiplex
from mxrob.percolation import (
    SimResult,
    UnionFind,
    component_sizes,
    giant_component_fraction,
    run_ensemble,
)
from oracles import bfs_largest_component, er_giant

# The two-layer, six-node instance from the layer-attack illustration,
# written 0-based. Layer 1 is a path 2-1-3-4-5-6 (1-based); layer 2 joins
# 1-2-6 and 3-4-5 through node 4.
FIG2_LAYER1 = [(0, 1), (0, 2), (2, 3), (3, 4), (4, 5)]
FIG2_LAYER2 = [(0, 1), (1, 5), (2, 3), (3, 4)]


def random_instance(rng, n):
    layers = tuple(generate_er_layer(n, float(rng.uniform(0, min(3, n - 1))), rng) for _ in range(2))
    net = MultiplexNetwork(n, layers)
    mask = RemovalMask(rng.random((2, n)) < rng.uniform(0, 0.6))
    return net, mask


def test_union_find_basics():
    uf = UnionFind(5)
    uf.union(0, 1)
    uf.union(3, 4)
    uf.union(1, 4)
    assert uf.find(0) == uf.find(3)
    assert uf.find(2) != uf.find(0)
    assert uf.largest() == 4
    assert len(set(uf.labels())) == 2


def test_intact_connected_layer():
    path = [(i, i + 1) for i in range(9)]
    net = MultiplexNetwork(10, (path, []))
    assert giant_component_fraction(net) == 1.0


def test_all_removed_gives_one_over_n():
    net = generate_multiplex(GeneratorSpec("er", 200, (3, 3)), 0)
    mask = RemovalMask(np.ones((2, 200), dtype=bool))
    assert giant_component_fraction(net, mask) == 1 / 200


def test_fig2_instance():
    net = MultiplexNetwork(6, (FIG2_LAYER1, FIG2_LAYER2))
    removed = np.zeros((2, 6), dtype=bool)
    removed[0, 0] = True  # layer node 1 of layer 1
    removed[1, 3] = True  # layer node 4 of layer 2
    mask = RemovalMask(removed)

    # within each layer alone, the caption's failed nodes fall out of the layer's giant component
    for layer, failed in ((0, {0, 1}), (1, {2, 3, 4})):
        g = nx.Graph()
        g.add_nodes_from(range(6))
        g.add_edges_from(e for e in net.layers[layer].tolist() if not removed[layer][e].any())
        gc = max(nx.connected_components(g), key=len)
        assert set(range(6)) - gc == failed

    assert giant_component_fraction(net, mask) == 1.0


def test_shared_edge_counts_once():
    net = MultiplexNetwork(3, ([(0, 1)], [(0, 1)]))
    assert giant_component_fraction(net) == pytest.approx(2 / 3)


def test_union_find_matches_bfs():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(2, 201))
        net, mask = random_instance(rng, n)
        expected = bfs_largest_component(n, net.layers, mask.removed)
        assert component_sizes(net, mask).largest() == expected


def test_union_find_partition_matches_networkx():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 201))
        net, mask = random_instance(rng, n)
        labels = component_sizes(net, mask).labels()
        g = nx.Graph()
        g.add_nodes_from(range(n))
        for e, dead in zip(net.layers, mask.removed):
            g.add_edges_from(x for x in e.tolist() if not dead[x].any())
        ours = {frozenset(np.flatnonzero(np.array(labels) == r)) for r in set(labels)}
        assert ours == {frozenset(c) for c in nx.connected_components(g)}


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_nested_masks_monotone(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 150))
    net, _ = random_instance(rng, n)
    u = rng.random((2, n))
    a, b = sorted(rng.random(2))
    small, large = RemovalMask(u < a), RemovalMask(u < b)
    assert small <= large
    assert giant_component_fraction(net, small) >= giant_component_fraction(net, large)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_relabel_invariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 150))
    net, mask = random_instance(rng, n)
    perm = rng.permutation(n)
    moved = np.empty_like(mask.removed)
    moved[:, perm] = mask.removed
    assert giant_component_fraction(net, mask) == giant_component_fraction(net.relabel(perm), RemovalMask(moved))


def test_mask_dimension_check():
    net = MultiplexNetwork(4, ([(0, 1)], []))
    with pytest.raises(ValueError):
        giant_component_fraction(net, RemovalMask(np.zeros((2, 3), dtype=bool)))


def test_ensemble_everything_removed():
    gen = GeneratorSpec("er", 500, (2, 2))
    res = run_ensemble(gen, LayerRandom((1, 1)), 10, seed=3)
    assert res.r_mean == 1 / 500 and res.r_std == 0.0
    assert len(res.per_run) == 10


def test_ensemble_intact_union():
    gen = GeneratorSpec("er", 5000, (1, 1))
    res = run_ensemble(gen, LayerRandom((0, 0)), 50, seed=1)
    assert abs(res.r_mean - er_giant(2.0)) < 0.01
    assert er_giant(2.0) == pytest.approx(0.796812, abs=1e-6)


def test_ensemble_deterministic_and_worker_independent():
    gen = GeneratorSpec("er", 300, (2, 3))
    spec = AttackSpec("layer-targeted", 0.2, 0.3)
    a = run_ensemble(gen, spec, 6, seed=42)
    b = run_ensemble(gen, spec, 6, seed=42, workers=3)
    assert a.per_run == b.per_run
    c = run_ensemble(gen, spec, 6, seed=43)
    assert a.per_run != c.per_run


def test_ensemble_fixed_network():
    gen = GeneratorSpec("er", 300, (2, 3))
    res = run_ensemble(gen, MultiplexRandom(0.0), 5, seed=8, regenerate=False)
    # without removal and with one shared network every run is identical
    assert len(set(res.per_run)) == 1
    assert isinstance(res, SimResult)
    assert run_ensemble(gen, MultiplexRandom(0.2), 3, seed=8, keep_runs=False).per_run is None


def test_ensemble_rejects_bad_input():
    gen = GeneratorSpec("er", 100, (2, 3))
    with pytest.raises(ValueError):
        run_ensemble(gen, LayerRandom((0, 0)), 0, seed=1)
    with pytest.raises(TypeError):
        run_ensemble(gen, 0.5, 3, seed=1)
