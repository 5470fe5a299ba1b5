"""Monte Carlo giant component of attacked multiplex networks.

Two multiplex nodes are linked when at least one layer still has an edge
between them with both end replicas alive. The giant component is the
largest connected set of the resulting union graph.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .attack import AttackRule, AttackSpec, RemovalMask, realize
from .core import MultiplexNetwork, joint_degree_histogram, rng_for, seed_sequence
from .netgen import GeneratorSpec, generate_multiplex

# Stream keys. Run r uses (r, NET_STREAM) for its network and
# (r, ATTACK_STREAM) for its mask; a shared network uses FIXED_NETWORK_KEY.
NET_STREAM = 0
ATTACK_STREAM = 1
FIXED_NETWORK_KEY = (1 << 31,)


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def labels(self) -> list:
        return [self.find(a) for a in range(len(self.parent))]

    def largest(self) -> int:
        return max(self.size[a] for a in range(len(self.parent)) if self.parent[a] == a)


def active_edges(net: MultiplexNetwork, mask: RemovalMask) -> np.ndarray:
    """Edges of every layer whose two end replicas both survive, stacked."""
    if not mask.matches(net):
        raise ValueError("mask does not match network dimensions")
    parts = []
    for e, dead in zip(net.layers, mask.removed):
        if e.size:
            parts.append(e[~(dead[e[:, 0]] | dead[e[:, 1]])])
    return np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)


def component_sizes(net: MultiplexNetwork, mask: RemovalMask) -> UnionFind:
    uf = UnionFind(net.n_nodes)
    find = uf.find
    parent, size = uf.parent, uf.size
    for u, w in active_edges(net, mask).tolist():
        ru, rw = find(u), find(w)
        if ru != rw:
            if size[ru] < size[rw]:
                ru, rw = rw, ru
            parent[rw] = ru
            size[ru] += size[rw]
    return uf


def giant_component_fraction(net: MultiplexNetwork, mask: Optional[RemovalMask] = None) -> float:
    """Largest union-graph component over ``N``.

    Fully removed nodes count in the denominator, so removing everything
    gives ``1/N``.
    """
    if mask is None:
        mask = RemovalMask.empty(net)
    return component_sizes(net, mask).largest() / net.n_nodes


@dataclass
class SimResult:
    r_mean: float
    r_std: float
    runs: int
    per_run: Optional[list] = field(default=None, repr=False)


def _resolve(rule, net):
    if isinstance(rule, AttackSpec):
        return rule.resolve(joint_degree_histogram(net) if rule.needs_histogram else None)
    return rule


def single_run(gen: GeneratorSpec, rule, seed: int, run_index: int,
               net: Optional[MultiplexNetwork] = None) -> float:
    """R of run ``run_index``; draws the network too unless ``net`` is given."""
    if net is None:
        net = generate_multiplex(gen, seed_sequence(seed, run_index, NET_STREAM))
    mask = realize(_resolve(rule, net), net, rng_for(seed, run_index, ATTACK_STREAM))
    return giant_component_fraction(net, mask)


def _run_chunk(args):
    gen, rule, seed, indices, net = args
    return [single_run(gen, rule, seed, r, net) for r in indices]


def run_ensemble(gen: GeneratorSpec, rule, runs: int, seed: int, regenerate: bool = True,
                 workers: int = 1, keep_runs: bool = True) -> SimResult:
    """Average R over ``runs`` independent realizations.

    ``rule`` is an :class:`AttackRule`, or an :class:`AttackSpec` whose
    targeted cutoffs are then fitted to each network's own degrees. Run ``r``
    draws from streams keyed by ``(seed, r)`` only, so the per-run values do
    not depend on ``workers``.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if not isinstance(rule, (AttackRule, AttackSpec)):
        raise TypeError(f"expected an AttackRule or AttackSpec, got {type(rule).__name__}")
    net = None if regenerate else generate_multiplex(gen, seed_sequence(seed, *FIXED_NETWORK_KEY))
    if workers <= 1 or runs == 1:
        values = _run_chunk((gen, rule, seed, range(runs), net))
    else:
        chunks = [range(i, runs, workers) for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, [(gen, rule, seed, c, net) for c in chunks]))
        values = [0.0] * runs
        for c, vals in zip(chunks, parts):
            for r, v in zip(c, vals):
                values[r] = v
    mean = math.fsum(values) / runs
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / runs)
    return SimResult(mean, std, runs, list(values) if keep_runs else None)
