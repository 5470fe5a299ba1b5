"""Generating-function predictions for attacked multiplex networks.

For a joint degree law ``p(k)`` and a removal rule, ``v_i`` is the
probability that following a random layer-``i`` link does not lead into the
giant component. It solves a coupled self-consistency map whose smallest
fixed point (reached by iterating up from 0) is the physical one, and the
giant component is ``R = 1 - H0(v)``. For two layers the percolation
threshold is where the leading eigenvalue of that map's Jacobian at (1, 1)
crosses one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .attack import ATTACK_KINDS, AttackRule, AttackSpec, LayerRandom
from .core import JointDegreeHistogram

FP_TOL = 1e-12
FP_MAX_ITER = 100_000
GIANT_EPS = 1e-9


class ConvergenceWarning(RuntimeWarning):
    pass


def _removal(hist: JointDegreeHistogram, rule: AttackRule) -> np.ndarray:
    return rule.removal_probabilities(hist.degrees)


def eval_H0(hist: JointDegreeHistogram, rule: AttackRule, x: Sequence[float]) -> float:
    """Degree generating function after removal, evaluated at ``x``.

    Per-layer rules: ``sum p(k) prod_i (phi_i + (1 - phi_i) x_i^k_i)``.
    Joint rules: ``sum p(k) (phi + (1 - phi) prod_i x_i^k_i)``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (hist.n_layers,):
        raise ValueError(f"x must have {hist.n_layers} entries, got shape {x.shape}")
    phi = _removal(hist, rule)
    powers = x[:, None] ** hist.degrees.T
    if rule.per_layer:
        terms = np.prod(phi + (1.0 - phi) * powers, axis=0)
    else:
        terms = phi[0] + (1.0 - phi[0]) * np.prod(powers, axis=0)
    return float(hist.probs @ terms)


def eval_G0(hist: JointDegreeHistogram, x: Sequence[float]) -> float:
    """Intact-network generating function ``sum p(k) prod_i x_i^k_i``."""
    x = np.asarray(x, dtype=float)
    return float(hist.probs @ np.prod(x[:, None] ** hist.degrees.T, axis=0))


def eval_G1(hist: JointDegreeHistogram, i: int, x: Sequence[float]) -> float:
    """Excess-degree generating function of layer ``i``, ``dG0/dx_i / z_i``."""
    x = np.asarray(x, dtype=float)
    k = hist.degrees.T
    powers = x[:, None] ** k
    powers[i] = x[i] ** np.maximum(k[i] - 1, 0)
    return float(hist.probs @ (k[i] * np.prod(powers, axis=0))) / hist.z[i]


def fixed_point_map(hist: JointDegreeHistogram, rule: AttackRule) -> Callable:
    """Return ``F`` with ``F(v)_i`` the right-hand side of the ``v_i`` equation.

    Layers with zero mean degree have no links to follow; their coordinate
    is pinned to 1.
    """
    k = hist.degrees.T.astype(float)
    km1 = np.maximum(k - 1.0, 0.0)
    phi = _removal(hist, rule)
    z = np.asarray(hist.z)
    live = z > 0
    weights = np.zeros_like(k)
    weights[live] = hist.probs * k[live] / z[live, None]
    lead = (weights * phi).sum(axis=1)
    m = hist.n_layers

    def F(v):
        v = np.asarray(v, dtype=float)
        powers = v[:, None] ** k
        own = v[:, None] ** km1
        out = np.ones(m)
        if rule.per_layer:
            fac = phi + (1.0 - phi) * powers
            for i in np.flatnonzero(live):
                rest = np.prod(np.delete(fac, i, axis=0), axis=0)
                out[i] = lead[i] + weights[i] @ ((1.0 - phi[i]) * own[i] * rest)
        else:
            for i in np.flatnonzero(live):
                rest = np.prod(np.delete(powers, i, axis=0), axis=0)
                out[i] = lead[i] + weights[i] @ ((1.0 - phi[0]) * own[i] * rest)
        return out

    return F


@dataclass
class FixedPoint:
    v: np.ndarray
    iterations: int
    converged: bool
    residual: float
    monotone: bool


def solve_fixed_point(hist: JointDegreeHistogram, rule: AttackRule,
                      tol: float = FP_TOL, max_iter: int = FP_MAX_ITER) -> FixedPoint:
    """Smallest fixed point of the ``v`` map, by plain iteration from 0.

    Iteration stops once the step is below ``tol`` and, with the observed
    contraction rate ``rho``, so is the remaining-error estimate
    ``step * rho / (1 - rho)``. The map has non-negative power-series
    coefficients, so iterates rise monotonically; ``monotone`` records whether they did. Hitting
    ``max_iter`` returns the last iterate with ``converged=False`` and a
    :class:`ConvergenceWarning`.
    """
    F = fixed_point_map(hist, rule)
    v = np.zeros(hist.n_layers)
    v[np.asarray(hist.z) <= 0] = 1.0
    monotone = True
    diff = prev = math.inf
    for it in range(1, max_iter + 1):
        new = np.minimum(F(v), 1.0)
        step = new - v
        if np.any(step < -1e-14):
            monotone = False
        prev, diff = diff, float(np.max(np.abs(step)))
        v = new
        if diff < tol:
            # slow linear contraction: also bound the distance still to go
            rate = diff / prev if prev > 0 else 0.0
            if rate >= 1.0 or diff * rate / (1.0 - rate) < tol:
                return FixedPoint(v, it, True, diff, monotone)
    warnings.warn(f"fixed point not converged after {max_iter} iterations (last step {diff:.3g})",
                  ConvergenceWarning, stacklevel=2)
    return FixedPoint(v, max_iter, False, diff, monotone)


def giant_component_size(hist: JointDegreeHistogram, rule: AttackRule, v=None) -> float:
    """``R = 1 - H0(v)`` at the fixed point (solved here unless given)."""
    if v is None:
        v = solve_fixed_point(hist, rule).v
    return min(max(1.0 - eval_H0(hist, rule, v), 0.0), 1.0)


@dataclass(frozen=True)
class Jacobian:
    kappa: tuple
    K: tuple
    lam: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.kappa[0], self.K[0]], [self.K[1], self.kappa[1]]])


def jacobian_lambda(hist: JointDegreeHistogram, rule: AttackRule) -> Jacobian:
    """Jacobian of the two-layer ``v`` map at (1, 1) and its leading eigenvalue.

    Diagonal ``kappa_i = <k_i (k_i - 1) s_i> / z_i`` and off-diagonal
    ``K_i = <k_1 k_2 s_1 s_2> / z_i``, where ``s_i`` is the survival
    probability of the layer-``i`` replica (for joint rules the node's
    survival probability, counted once).
    """
    if hist.n_layers != 2:
        raise ValueError(f"Jacobian criterion is defined for 2 layers, got {hist.n_layers}")
    z1, z2 = hist.z
    if z1 <= 0 or z2 <= 0:
        raise ValueError("both layers need a positive mean degree")
    k1, k2 = hist.degrees.T.astype(float)
    surv = 1.0 - _removal(hist, rule)
    both = surv[0] * surv[1] if rule.per_layer else surv[0]
    p = hist.probs
    kappa = ((p @ (k1 * k1 * surv[0]) - p @ (k1 * surv[0])) / z1,
             (p @ (k2 * k2 * surv[1]) - p @ (k2 * surv[1])) / z2)
    cross = p @ (k1 * k2 * both)
    K = (cross / z1, cross / z2)
    disc = max((kappa[0] - kappa[1]) ** 2 + 4.0 * K[0] * K[1], 0.0)
    lam = 0.5 * (kappa[0] + kappa[1] + math.sqrt(disc))
    return Jacobian(tuple(float(x) for x in kappa), tuple(float(x) for x in K), float(lam))


@dataclass
class TheoryResult:
    v: np.ndarray
    r: float
    lam: float
    iterations: int
    converged: bool = True
    residual: float = 0.0
    monotone: bool = True


def analyze(hist: JointDegreeHistogram, rule: AttackRule) -> TheoryResult:
    """Fixed point, giant component and (two layers only) leading eigenvalue."""
    fp = solve_fixed_point(hist, rule)
    lam = jacobian_lambda(hist, rule).lam if hist.n_layers == 2 and min(hist.z) > 0 else math.nan
    return TheoryResult(fp.v, giant_component_size(hist, rule, fp.v), lam,
                        fp.iterations, fp.converged, fp.residual, fp.monotone)


@dataclass(frozen=True)
class Threshold:
    """Critical parameter of a one-parameter attack family.

    ``flag`` is ``"ok"`` for a crossing inside the interval, ``"collapsed"``
    when there is no giant component even at the lower end (``phi_c`` is
    then the lower end) and ``"robust"`` when the leading eigenvalue never
    drops below one (``phi_c`` is then the upper end).
    """

    phi_c: float
    flag: str


def critical_point(hist: JointDegreeHistogram, family: Callable[[float], AttackRule],
                   lo: float = 0.0, hi: float = 1.0, xtol: float = 1e-6,
                   lam_tol: float = 1e-9) -> Threshold:
    """Bisect ``Lambda(family(t)) = 1`` on ``[lo, hi]``.

    The eigenvalue must be non-increasing in ``t``, as it is for any family
    whose removal probabilities grow pointwise with ``t``.
    """
    def excess(t):
        return jacobian_lambda(hist, family(t)).lam - 1.0

    if excess(lo) <= lam_tol:
        return Threshold(lo, "collapsed")
    if excess(hi) >= -lam_tol:
        return Threshold(hi, "robust")
    while hi - lo >= xtol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return Threshold(0.5 * (lo + hi), "ok")


def attack_family(kind: str, hist: JointDegreeHistogram, fixed_phi1=None) -> Callable[[float], AttackRule]:
    """One-parameter family of rules of the given attack kind.

    Layer kinds vary ``phi2`` with ``phi1`` held at ``fixed_phi1``, or vary
    both together when ``fixed_phi1`` is None. Multiplex kinds vary ``phi``.
    Targeted fractions become cutoffs against ``hist``.
    """
    if kind not in ATTACK_KINDS:
        raise ValueError(f"unknown attack kind {kind!r}")
    if kind.startswith("multiplex"):
        return lambda t: AttackSpec(kind, t).resolve(hist)
    if fixed_phi1 is None:
        return lambda t: AttackSpec(kind, t, t).resolve(hist)
    return lambda t: AttackSpec(kind, fixed_phi1, t).resolve(hist)


def critical_phi2(hist: JointDegreeHistogram, kind: str, phi1: float, **kw) -> Threshold:
    """Critical layer-2 removal fraction with layer 1 held at ``phi1``."""
    return critical_point(hist, attack_family(kind, hist, phi1), **kw)


def critical_phi1(hist: JointDegreeHistogram, kind: str, phi2: float, **kw) -> Threshold:
    """Critical layer-1 removal fraction with layer 2 held at ``phi2``."""
    def family(t):
        return AttackSpec(kind, t, phi2).resolve(hist)
    return critical_point(hist, family, **kw)


def symmetric_threshold(hist: JointDegreeHistogram, kind: str, **kw) -> Threshold:
    """Critical fraction when every layer (or every node) loses the same share."""
    return critical_point(hist, attack_family(kind, hist), **kw)


def threshold_curve(hist: JointDegreeHistogram, kind: str, grid: Sequence[float]) -> list:
    """``(phi1, phi2_c, flag)`` for every ``phi1`` in ``grid``."""
    if not kind.startswith("layer"):
        raise ValueError("threshold curves are defined for layer attacks")
    out = []
    for phi1 in grid:
        th = critical_phi2(hist, kind, float(phi1))
        out.append((float(phi1), th.phi_c, th.flag))
    return out


def intact(hist: JointDegreeHistogram) -> AttackRule:
    return LayerRandom((0.0,) * hist.n_layers)
