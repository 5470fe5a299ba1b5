import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mxrob.core import (
    JointDegreeHistogram,
    MultiplexNetwork,
    TruncationError,
    derive_seed,
    joint_degree_histogram,
    load_multiplex,
    moment,
    pooled_histogram,
    product_poisson_histogram,
    read_edge_list,
    rng_for,
    save_multiplex,
)
from mxrob.netgen import GeneratorSpec, generate_multiplex


def test_histogram_single_edge_layer1_only():
    net = MultiplexNetwork(2, ([(0, 1)], []))
    h = joint_degree_histogram(net)
    assert h.entries == {(1, 0): 1.0}
    assert h.z == (1.0, 0.0)


def test_histogram_triangle_both_layers():
    tri = [(0, 1), (1, 2), (0, 2)]
    h = joint_degree_histogram(MultiplexNetwork(3, (tri, tri)))
    assert h.entries == {(2, 2): 1.0}
    assert h.z == (2.0, 2.0)


def test_histogram_of_er_pair_matches_product_poisson():
    net = generate_multiplex(GeneratorSpec("er", 5000, (2, 3)), 11)
    h = joint_degree_histogram(net)
    # G(n, M) pins the mean exactly
    assert h.z == pytest.approx((2.0, 3.0), abs=1e-12)
    p00 = math.exp(-2) * math.exp(-3)
    sigma = math.sqrt(p00 * (1 - p00) / 5000)
    assert abs(h.entries.get((0, 0), 0.0) - p00) < 3 * sigma
    oracle = product_poisson_histogram((2, 3)).entries
    for key in [(1, 2), (2, 3), (3, 2)]:
        sigma = math.sqrt(oracle[key] * (1 - oracle[key]) / 5000)
        assert abs(h.entries.get(key, 0.0) - oracle[key]) < 4 * sigma


def test_product_poisson_zero():
    assert product_poisson_histogram((0, 0)).entries == {(0, 0): 1.0}


def test_product_poisson_origin_mass():
    h = product_poisson_histogram((1, 1), k_max=30)
    assert h.entries[(0, 0)] == pytest.approx(math.exp(-2), abs=1e-12)
    assert h.entries[(0, 0)] == pytest.approx(0.135335, abs=1e-6)


def test_product_poisson_means():
    h = product_poisson_histogram((2, 3), k_max=40)
    assert h.z == pytest.approx((2, 3), abs=1e-9)


def test_product_poisson_truncation_error():
    with pytest.raises(TruncationError):
        product_poisson_histogram((20, 1), k_max=25)


@pytest.mark.parametrize("z", [(0.5, 1.0), (2, 3), (6, 6), (10, 0.1)])
def test_product_poisson_factorial_moment(z):
    h = product_poisson_histogram(z)
    assert h.probs.sum() == pytest.approx(1.0, abs=1e-12)
    for i, zi in enumerate(z):
        fm = moment(h, lambda *k: k[i] ** 2 - k[i])
        assert fm == pytest.approx(zi**2, abs=1e-9)


def test_moments():
    h = product_poisson_histogram((2, 3))
    assert moment(h, lambda k1, k2: 1.0) == pytest.approx(1.0, abs=1e-12)
    assert moment(h, lambda k1, k2: k1) == pytest.approx(2.0, abs=1e-9)
    assert moment(h, lambda k1, k2: k1 * k2) == pytest.approx(6.0, abs=1e-9)


def test_histogram_validation():
    with pytest.raises(ValueError):
        JointDegreeHistogram.from_mapping({(1, 1): 0.5})
    with pytest.raises(ValueError):
        JointDegreeHistogram.from_mapping({(1, 1): 1.2, (0, 0): -0.2})
    with pytest.raises(ValueError):
        JointDegreeHistogram.from_mapping({(-1, 1): 1.0})


def test_marginals_and_total_degree():
    h = JointDegreeHistogram.from_mapping({(1, 0): 0.25, (1, 2): 0.25, (3, 0): 0.5})
    assert h.marginal(0) == {1: 0.5, 3: 0.5}
    assert h.marginal(1) == {0: 0.75, 2: 0.25}
    assert h.total_degree() == {1: 0.25, 3: 1.0 - 0.25}


def test_network_validation():
    with pytest.raises(ValueError, match="self-loop"):
        MultiplexNetwork(3, ([(1, 1)],))
    with pytest.raises(ValueError, match="duplicate"):
        MultiplexNetwork(3, ([(0, 1), (1, 0)],))
    with pytest.raises(ValueError, match="range"):
        MultiplexNetwork(3, ([(0, 3)],))
    with pytest.raises(ValueError):
        MultiplexNetwork(3, ())


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_histogram_permutation_invariant(n, seed):
    rng = np.random.default_rng(seed)
    layers = []
    for _ in range(2):
        pairs = {tuple(sorted(rng.choice(n, 2, replace=False))) for _ in range(rng.integers(0, 2 * n))}
        layers.append(sorted(pairs))
    net = MultiplexNetwork(n, tuple(layers))
    perm = rng.permutation(n)
    assert joint_degree_histogram(net).entries == joint_degree_histogram(net.relabel(perm)).entries


def test_pooled_histogram_is_average():
    gen = GeneratorSpec("er", 200, (2, 2))
    nets = [generate_multiplex(gen, s) for s in range(3)]
    pooled = pooled_histogram(nets).entries
    singles = [joint_degree_histogram(n).entries for n in nets]
    for key, p in pooled.items():
        assert p == pytest.approx(sum(s.get(key, 0.0) for s in singles) / 3, abs=1e-15)


def test_edge_list_round_trip(tmp_path):
    net = generate_multiplex(GeneratorSpec("er", 50, (2, 3)), 3)
    paths = save_multiplex(net, tmp_path)
    assert paths[0].read_text().splitlines()[0] == "# layer 1 n=50"
    layer, n, edges = read_edge_list(paths[1])
    assert (layer, n) == (2, 50)
    back = load_multiplex(reversed(paths))
    for a, b in zip(net.layers, back.layers):
        np.testing.assert_array_equal(a, b)


def test_histogram_csv(tmp_path):
    h = JointDegreeHistogram.from_mapping({(1, 0): 0.25, (0, 2): 0.75})
    h.to_csv(tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines == ["k1,k2,p", "0,2,0.75", "1,0,0.25"] or lines == ["k1,k2,p", "1,0,0.25", "0,2,0.75"]


def test_seed_derivation_is_order_free():
    a = [derive_seed(7, r) for r in range(5)]
    b = [derive_seed(7, r) for r in reversed(range(5))][::-1]
    assert a == b
    assert len(set(a)) == 5
    assert derive_seed(7, 0) != derive_seed(8, 0)
    np.testing.assert_array_equal(rng_for(7, 3, 1).random(4), rng_for(7, 3, 1).random(4))
    with pytest.raises(ValueError):
        derive_seed(-1, 0)


def test_chi2_sanity_of_product_poisson_tail():
    # tail beyond the default cutoff is negligible for every z used in experiments
    for z in range(0, 13):
        km = max(30, math.ceil(z + 12 * math.sqrt(z)))
        assert stats.poisson.sf(km, z) < 1e-10
