"""Degree-dependent removal rules and their random realization.

A rule either acts per layer, giving each replica its own removal
probability from its degree in that layer, or jointly, giving each
multiplex node one probability from its whole degree vector and removing
all of its replicas together.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import JointDegreeHistogram, MultiplexNetwork

ATTACK_KINDS = ("layer-random", "layer-targeted", "multiplex-random", "multiplex-targeted")


def _check_prob(name, x):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
    return float(x)


def step_phi(k, k_c, f):
    """1 above the cutoff degree, ``f`` at it, 0 below."""
    k = np.asarray(k)
    return np.where(k > k_c, 1.0, np.where(k == k_c, f, 0.0))


class AttackRule:
    """Base class. Per-layer rules implement :meth:`layer_phi`, joint rules
    implement :meth:`joint_phi`."""

    per_layer = True
    n_layers = None

    def layer_phi(self, i: int, k) -> np.ndarray:
        raise NotImplementedError

    def joint_phi(self, degrees) -> np.ndarray:
        raise NotImplementedError

    def removal_probabilities(self, degrees) -> np.ndarray:
        """Removal probability of every replica, shape ``(m, K)``.

        ``degrees`` is ``(K, m)``. For joint rules all rows are equal.
        """
        degrees = np.asarray(degrees)
        m = degrees.shape[1]
        if self.n_layers is not None and self.n_layers != m:
            raise ValueError(f"rule is for {self.n_layers} layers, got {m}")
        if self.per_layer:
            return np.stack([self.layer_phi(i, degrees[:, i]) for i in range(m)])
        return np.broadcast_to(self.joint_phi(degrees), (m, degrees.shape[0]))


@dataclass(frozen=True)
class LayerRandom(AttackRule):
    """Each replica of layer ``i`` removed with constant probability ``phis[i]``."""

    phis: tuple

    def __post_init__(self):
        object.__setattr__(self, "phis", tuple(_check_prob("phi", p) for p in self.phis))

    @property
    def n_layers(self):
        return len(self.phis)

    def layer_phi(self, i, k):
        return np.full(np.shape(k), self.phis[i])


@dataclass(frozen=True)
class LayerTargeted(AttackRule):
    """Per-layer degree cutoff: ``cutoffs[i] = (k_c, f)``."""

    cutoffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "cutoffs", tuple((int(kc), _check_prob("f", f)) for kc, f in self.cutoffs))

    @property
    def n_layers(self):
        return len(self.cutoffs)

    def layer_phi(self, i, k):
        return step_phi(k, *self.cutoffs[i])


@dataclass(frozen=True)
class MultiplexRandom(AttackRule):
    """Each multiplex node (with all its replicas) removed with probability ``phi``."""

    phi: float
    per_layer = False

    def __post_init__(self):
        object.__setattr__(self, "phi", _check_prob("phi", self.phi))

    def joint_phi(self, degrees):
        return np.full(np.shape(degrees)[0], self.phi)


@dataclass(frozen=True)
class MultiplexTargeted(AttackRule):
    """Cutoff on the total degree ``k_1 + ... + k_m`` of a multiplex node."""

    k_c: int
    f: float
    per_layer = False

    def __post_init__(self):
        object.__setattr__(self, "k_c", int(self.k_c))
        object.__setattr__(self, "f", _check_prob("f", self.f))

    def joint_phi(self, degrees):
        return step_phi(np.asarray(degrees).sum(axis=1), self.k_c, self.f)


def targeted_cutoff(degree_hist: Mapping[int, float], phi_target: float):
    """Cutoff ``(k_c, f)`` that removes a fraction ``phi_target`` of nodes.

    Nodes are removed from the highest degree down: every degree above
    ``k_c`` entirely, degree ``k_c`` with probability ``f``. ``k_c`` is the
    largest degree with ``P(k >= k_c) >= phi_target``, so ``phi_target = 0``
    gives ``(max degree, 0)`` and ``phi_target = 1`` gives ``(min degree, 1)``.
    """
    phi_target = _check_prob("phi_target", phi_target)
    support = sorted(((int(k), float(p)) for k, p in degree_hist.items() if p > 0), reverse=True)
    if not support:
        raise ValueError("empty degree histogram")
    if phi_target == 1.0:
        return support[-1][0], 1.0
    above = 0.0
    for k, p in support:
        # tolerance absorbs rounding in the running tail sum
        if above + p >= phi_target - 1e-15:
            break
        above += p
    else:
        above -= p
    f = min(max((phi_target - above) / p, 0.0), 1.0)
    return k, f


def removed_fraction(degree_hist: Mapping[int, float], k_c: int, f: float) -> float:
    """Expected removed fraction under a cutoff rule."""
    return float(sum(p * step_phi(k, k_c, f) for k, p in degree_hist.items()))


def multiplex_targeted_cutoff(joint_hist: JointDegreeHistogram, phi_target: float):
    """As :func:`targeted_cutoff`, on the law of the total degree ``k_1 + k_2``."""
    return targeted_cutoff(joint_hist.total_degree(), phi_target)


@dataclass(frozen=True)
class AttackSpec:
    """An attack given by removed fractions, resolved against a degree law.

    Random kinds map straight onto a rule. Targeted kinds turn each fraction
    into a cutoff using the histogram passed to :meth:`resolve`. For
    multiplex kinds only ``phi1`` is used.
    """

    kind: str
    phi1: float
    phi2: float = 0.0

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}; choose from {ATTACK_KINDS}")
        _check_prob("phi1", self.phi1)
        _check_prob("phi2", self.phi2)

    @property
    def needs_histogram(self) -> bool:
        return self.kind.endswith("targeted")

    def resolve(self, hist: JointDegreeHistogram | None = None) -> AttackRule:
        if self.kind == "layer-random":
            return LayerRandom((self.phi1, self.phi2))
        if self.kind == "multiplex-random":
            return MultiplexRandom(self.phi1)
        if hist is None:
            raise ValueError("targeted attacks need a degree histogram")
        if self.kind == "layer-targeted":
            return LayerTargeted((targeted_cutoff(hist.marginal(0), self.phi1),
                                  targeted_cutoff(hist.marginal(1), self.phi2)))
        return MultiplexTargeted(*multiplex_targeted_cutoff(hist, self.phi1))


@dataclass(frozen=True, eq=False)
class RemovalMask:
    """``removed[i, j]`` is True when replica ``j`` of layer ``i`` is removed."""

    removed: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.removed, dtype=bool)
        if r.ndim != 2:
            raise ValueError("removal mask must be (m, N)")
        object.__setattr__(self, "removed", r)

    @classmethod
    def empty(cls, net: MultiplexNetwork) -> "RemovalMask":
        return cls(np.zeros((net.n_layers, net.n_nodes), dtype=bool))

    def matches(self, net: MultiplexNetwork) -> bool:
        return self.removed.shape == (net.n_layers, net.n_nodes)

    def __le__(self, other: "RemovalMask") -> bool:
        return bool(np.all(~self.removed | other.removed))


def realize(rule: AttackRule, net: MultiplexNetwork, rng: np.random.Generator) -> RemovalMask:
    """Draw which replicas a rule removes, using the network's own degrees."""
    degrees = net.degrees().T
    probs = rule.removal_probabilities(degrees)
    if rule.per_layer:
        removed = rng.random(probs.shape) < probs
    else:
        removed = np.broadcast_to(rng.random(net.n_nodes) < probs[0], probs.shape).copy()
    return RemovalMask(removed)
