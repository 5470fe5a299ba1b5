"""Erdos-Renyi and Barabasi-Albert layers, and multiplexes built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MultiplexNetwork, seed_sequence

TOPOLOGIES = ("er", "ba")


def generate_er_layer(n: int, z: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform G(n, M) graph with ``M = round(n z / 2)`` edges.

    Pairs are drawn uniformly and the first ``M`` distinct ones kept, which
    gives a uniform ``M``-subset of all ``n(n-1)/2`` pairs.
    """
    if n < 2:
        raise ValueError("ER layer needs n >= 2")
    if z < 0 or z > n - 1:
        raise ValueError(f"mean degree {z} impossible for n={n}")
    n_edges = int(round(n * z / 2))
    if n_edges == 0:
        return np.empty((0, 2), dtype=np.int64)
    n_pairs = n * (n - 1) // 2
    if n_edges > n_pairs // 2:
        # dense: choose the pairs directly
        codes = rng.choice(n_pairs, size=n_edges, replace=False)
        return _decode_pairs(np.sort(codes), n)
    codes = np.empty(0, dtype=np.int64)
    while codes.size < n_edges:
        need = n_edges - codes.size
        u = rng.integers(0, n, size=need + need // 8 + 8)
        w = rng.integers(0, n, size=u.size)
        ok = u != w
        lo, hi = np.minimum(u[ok], w[ok]), np.maximum(u[ok], w[ok])
        codes = np.concatenate([codes, lo * n + hi])
        _, first = np.unique(codes, return_index=True)
        codes = codes[np.sort(first)]
    codes = codes[:n_edges]
    return np.stack([codes // n, codes % n], axis=1)


def _decode_pairs(codes: np.ndarray, n: int) -> np.ndarray:
    # codes index the pairs (u, w), u < w, in row-major order
    out = np.empty((codes.size, 2), dtype=np.int64)
    row_start = np.array([u * n - u * (u + 1) // 2 for u in range(n)])
    u = np.searchsorted(row_start, codes, side="right") - 1
    out[:, 0] = u
    out[:, 1] = codes - row_start[u] + u + 1
    return out


def generate_ba_layer(n: int, m_attach, rng: np.random.Generator) -> np.ndarray:
    """Preferential-attachment graph grown from a clique.

    Growth starts from a clique on ``ceil(m_attach) + 1`` nodes; every later
    node links to ``m_attach`` distinct existing nodes chosen with probability
    proportional to their current degree. A non-integer ``m_attach`` makes
    each new node draw ``floor`` or ``ceil`` of it, with the fractional part
    as the probability of the larger count, so the mean degree still tends to
    ``2 m_attach``.
    """
    m_hi = math.ceil(m_attach)
    if m_attach <= 0 or n <= m_hi:
        raise ValueError(f"need n > m_attach >= 1, got n={n}, m_attach={m_attach}")
    m_lo = math.floor(m_attach)
    frac = m_attach - m_lo
    edges = [(u, w) for u in range(m_hi + 1) for w in range(u + 1, m_hi + 1)]
    # one entry per edge end, so a uniform pick is degree-proportional
    ends = [x for e in edges for x in e]
    for new in range(m_hi + 1, n):
        m = m_lo + (1 if frac and rng.random() < frac else 0)
        targets = set()
        while len(targets) < m:
            targets.add(ends[int(rng.integers(len(ends)))])
        for t in sorted(targets):
            edges.append((t, new))
            ends.extend((t, new))
    return np.array(edges, dtype=np.int64).reshape(-1, 2)


def assemble_multiplex(layers, n: int) -> MultiplexNetwork:
    """Stack edge lists into a multiplex on ``n`` nodes (validated)."""
    return MultiplexNetwork(n, tuple(layers))


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a random multiplex: one topology and mean degree per layer.

    BA layers need ``target_z / 2`` to be a whole attachment count unless
    ``fractional_ba`` is set, in which case attachment counts are mixed.
    """

    topology: tuple
    n_nodes: int
    target_z: tuple
    fractional_ba: bool = False

    def __post_init__(self):
        topo = (self.topology,) * len(self.target_z) if isinstance(self.topology, str) else tuple(self.topology)
        object.__setattr__(self, "topology", tuple(t.lower() for t in topo))
        object.__setattr__(self, "target_z", tuple(float(z) for z in self.target_z))
        if len(self.topology) != len(self.target_z):
            raise ValueError("one topology per layer required")
        if self.n_nodes < 2:
            raise ValueError("n_nodes must be >= 2")
        for t, z in zip(self.topology, self.target_z):
            if t not in TOPOLOGIES:
                raise ValueError(f"unknown topology {t!r}")
            if z < 0:
                raise ValueError(f"mean degree must be >= 0, got {z}")
            if t == "ba":
                half = z / 2
                least = 0.5 if self.fractional_ba else 1
                if half < least:
                    raise ValueError(f"BA layer needs z >= {2 * least:g}, got {z}")
                if not self.fractional_ba and half != round(half):
                    raise ValueError(f"BA layer needs an even mean degree, got {z}")
                if half >= self.n_nodes:
                    raise ValueError(f"BA mean degree {z} too large for n={self.n_nodes}")
            elif z > self.n_nodes - 1:
                raise ValueError(f"ER mean degree {z} too large for n={self.n_nodes}")


def generate_multiplex(spec: GeneratorSpec, seed) -> MultiplexNetwork:
    """Draw a multiplex from ``spec``; each layer gets its own child stream.

    ``seed`` is an int or a :class:`numpy.random.SeedSequence`.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else seed_sequence(int(seed))
    layers = []
    for i, (topo, z) in enumerate(zip(spec.topology, spec.target_z)):
        child = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (i,))
        rng = np.random.default_rng(child)
        if topo == "er":
            layers.append(generate_er_layer(spec.n_nodes, z, rng))
        else:
            half = z / 2
            layers.append(generate_ba_layer(spec.n_nodes, int(half) if half == int(half) else half, rng))
    return assemble_multiplex(layers, spec.n_nodes)
