"""Multiplex network container, joint degree statistics and seeding helpers.

A multiplex network here is ``N`` nodes shared by ``m`` layers, each layer an
undirected simple edge list over the same index space. Layer ``i`` of node
``j`` is called a replica (or layer node).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import stats

MASS_TOL = 1e-12
POISSON_TAIL_TOL = 1e-10


class TruncationError(ValueError):
    """Raised when a truncated degree law would drop too much tail mass."""


def _canonical_edges(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"edge list must have shape (M, 2), got {arr.shape}")
    return np.sort(arr, axis=1)


@dataclass(frozen=True, eq=False)
class MultiplexNetwork:
    """``n_nodes`` multiplex nodes and one undirected edge list per layer.

    Edges are stored with ``u < w``. Construction validates that there are no
    self-loops, no duplicate edges inside a layer and no out-of-range indices.
    """

    n_nodes: int
    layers: tuple

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")
        if len(self.layers) < 1:
            raise ValueError("a multiplex network needs at least one layer")
        canon = []
        for i, edges in enumerate(self.layers):
            e = _canonical_edges(edges)
            if e.size:
                if e.min() < 0 or e.max() >= self.n_nodes:
                    raise ValueError(f"layer {i}: node index out of range [0, {self.n_nodes})")
                if np.any(e[:, 0] == e[:, 1]):
                    raise ValueError(f"layer {i}: self-loop")
                order = np.lexsort((e[:, 1], e[:, 0]))
                s = e[order]
                if np.any(np.all(s[1:] == s[:-1], axis=1)):
                    raise ValueError(f"layer {i}: duplicate edge")
            e.setflags(write=False)
            canon.append(e)
        object.__setattr__(self, "layers", tuple(canon))

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def degrees(self) -> np.ndarray:
        """Per-layer degree of every node, shape ``(m, N)``."""
        out = np.zeros((self.n_layers, self.n_nodes), dtype=np.int64)
        for i, e in enumerate(self.layers):
            if e.size:
                out[i] = np.bincount(e.ravel(), minlength=self.n_nodes)
        return out

    def relabel(self, perm) -> "MultiplexNetwork":
        """Return the network with node ``j`` renamed to ``perm[j]``."""
        perm = np.asarray(perm, dtype=np.int64)
        return MultiplexNetwork(self.n_nodes, tuple(perm[e] for e in self.layers))


@dataclass(frozen=True, eq=False)
class JointDegreeHistogram:
    """Probability mass over degree vectors ``(k_1, ..., k_m)``.

    Only the support is stored: ``degrees`` has one row per distinct degree
    vector, ``probs`` the matching masses. ``z`` holds the per-layer mean
    degrees and is always recomputed from the masses.
    """

    degrees: np.ndarray
    probs: np.ndarray
    z: tuple = field(init=False)

    def __post_init__(self):
        deg = np.asarray(self.degrees, dtype=np.int64)
        p = np.asarray(self.probs, dtype=float)
        if deg.ndim != 2 or deg.shape[0] != p.shape[0]:
            raise ValueError("degrees must be (K, m) with one mass per row")
        if np.any(deg < 0):
            raise ValueError("degrees must be non-negative")
        if np.any(p < 0):
            raise ValueError("masses must be non-negative")
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {p.sum()!r}, not 1")
        deg.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "degrees", deg)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "z", tuple(float(x) for x in p @ deg))

    @classmethod
    def from_mapping(cls, entries: Mapping[tuple, float]) -> "JointDegreeHistogram":
        keys = list(entries)
        return cls(np.array(keys, dtype=np.int64).reshape(len(keys), -1),
                   np.array([entries[k] for k in keys], dtype=float))

    @property
    def n_layers(self) -> int:
        return self.degrees.shape[1]

    @property
    def entries(self) -> dict:
        return {tuple(int(x) for x in k): float(p) for k, p in zip(self.degrees, self.probs)}

    def column(self, i: int) -> np.ndarray:
        return self.degrees[:, i]

    def marginal(self, i: int) -> dict:
        """Degree law of layer ``i`` alone, as ``{k: p}``."""
        ks, inv = np.unique(self.degrees[:, i], return_inverse=True)
        mass = np.bincount(inv, weights=self.probs)
        return {int(k): float(q) for k, q in zip(ks, mass)}

    def total_degree(self) -> dict:
        """Law of ``k_1 + ... + k_m``, as ``{s: p}``."""
        ks, inv = np.unique(self.degrees.sum(axis=1), return_inverse=True)
        mass = np.bincount(inv, weights=self.probs)
        return {int(k): float(q) for k, q in zip(ks, mass)}

    def to_csv(self, path) -> None:
        names = [f"k{i + 1}" for i in range(self.n_layers)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names + ["p"])
            for k, p in zip(self.degrees, self.probs):
                w.writerow([int(x) for x in k] + [repr(float(p))])


def _histogram_from_degree_rows(rows: np.ndarray) -> JointDegreeHistogram:
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    return JointDegreeHistogram(uniq, counts / counts.sum())


def joint_degree_histogram(net: MultiplexNetwork) -> JointDegreeHistogram:
    """Empirical joint degree distribution of ``net``."""
    return _histogram_from_degree_rows(net.degrees().T)


def pooled_histogram(nets: Sequence[MultiplexNetwork]) -> JointDegreeHistogram:
    """Joint degree distribution of all nodes of several networks taken together.

    For networks of equal size this is the average of their histograms.
    """
    return _histogram_from_degree_rows(np.concatenate([n.degrees().T for n in nets]))


def default_poisson_kmax(z: float) -> int:
    return max(30, math.ceil(z + 12 * math.sqrt(z)))


def product_poisson_histogram(z: Sequence[float], k_max=None) -> JointDegreeHistogram:
    """Independent Poisson degrees per layer, truncated at ``k_max``.

    ``k_max`` may be a single int or one per layer; by default each layer uses
    ``max(30, ceil(z + 12 sqrt(z)))``. Raises :class:`TruncationError` if the
    discarded tail of any layer exceeds 1e-10.
    """
    z = [float(x) for x in z]
    if any(x < 0 for x in z):
        raise ValueError("mean degrees must be non-negative")
    if k_max is None:
        kmaxes = [default_poisson_kmax(x) for x in z]
    elif np.ndim(k_max) == 0:
        kmaxes = [int(k_max)] * len(z)
    else:
        kmaxes = [int(k) for k in k_max]
    pmfs = []
    for zi, km in zip(z, kmaxes):
        tail = stats.poisson.sf(km, zi) if zi > 0 else 0.0
        if tail >= POISSON_TAIL_TOL:
            raise TruncationError(f"Poisson(z={zi}) tail beyond k={km} is {tail:.3g}")
        ks = np.arange(km + 1)
        pmfs.append(stats.poisson.pmf(ks, zi) if zi > 0 else (ks == 0).astype(float))
    grids = np.meshgrid(*[np.arange(len(p)) for p in pmfs], indexing="ij")
    mass = pmfs[0]
    for p in pmfs[1:]:
        mass = np.multiply.outer(mass, p)
    mass = np.asarray(mass).ravel()
    deg = np.stack([g.ravel() for g in grids], axis=1)
    keep = mass > 0
    return JointDegreeHistogram(deg[keep], mass[keep] / mass[keep].sum())


def moment(hist: JointDegreeHistogram, w: Callable) -> float:
    """Average of ``w(k_1, ..., k_m)`` under ``hist``.

    ``w`` is called once with one integer array per layer and may return an
    array or a scalar.
    """
    vals = w(*hist.degrees.T)
    return float(np.sum(hist.probs * np.broadcast_to(vals, hist.probs.shape)))


# Seeding. Every random stream is a numpy SeedSequence keyed by
# (master_seed, *key); SeedSequence hashes the pair, so a stream depends only
# on its key and never on the order in which streams are requested.

def seed_sequence(master_seed: int, *key: int) -> np.random.SeedSequence:
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError("master seed must be a 64-bit unsigned integer")
    return np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))


def derive_seed(master_seed: int, run_index: int) -> int:
    """64-bit seed of run ``run_index``."""
    return int(seed_sequence(master_seed, run_index).generate_state(1, np.uint64)[0])


def rng_for(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(master_seed, *key))


# Edge-list files: header "# layer <i> n=<N>", then one "u w" pair per line.

def write_edge_list(path, edges, layer: int, n_nodes: int) -> None:
    with open(path, "w") as fh:
        fh.write(f"# layer {layer} n={n_nodes}\n")
        for u, w in np.asarray(edges).reshape(-1, 2):
            fh.write(f"{u} {w}\n")


def read_edge_list(path):
    """Return ``(layer, n_nodes, edges)`` from an edge-list file."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[:2] != ["#", "layer"] or not header[3].startswith("n="):
            raise ValueError(f"{path}: bad header {' '.join(header)!r}")
        layer, n = int(header[2]), int(header[3][2:])
        rows = [line.split() for line in fh if line.strip() and not line.startswith("#")]
    edges = np.array(rows, dtype=np.int64).reshape(-1, 2)
    return layer, n, edges


def save_multiplex(net: MultiplexNetwork, directory, stem: str = "layer") -> list:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, e in enumerate(net.layers, start=1):
        p = directory / f"{stem}{i}.edges"
        write_edge_list(p, e, i, net.n_nodes)
        paths.append(p)
    return paths


def load_multiplex(paths) -> MultiplexNetwork:
    parsed = sorted((read_edge_list(p) for p in paths), key=lambda t: t[0])
    sizes = {n for _, n, _ in parsed}
    if len(sizes) != 1:
        raise ValueError(f"layer files disagree on n: {sorted(sizes)}")
    return MultiplexNetwork(sizes.pop(), tuple(e for _, _, e in parsed))
