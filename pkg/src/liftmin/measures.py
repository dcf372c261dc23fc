"""Invariant measures carried by closed geodesics and disjoint partitions.

A measure here is a convex combination of constant-speed closed geodesics.
For the geodesic Lagrangian the action of such a measure is the weighted mean
of squared speeds, and its rotation vector is the weighted mean of
``speed * homology / length``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Rational, Real
from typing import Sequence

from .curves import CurveClass, DisjointPartition, make_partition

Number = float | Fraction


class MeasureError(ValueError):
    pass


def _positive(name: str, x: Real) -> None:
    if not x > 0:
        raise MeasureError(f"{name} must be positive, got {x!r}")


def _scale(h: Sequence[int], x: Number) -> tuple:
    if isinstance(x, Fraction):
        return tuple(Fraction(v) * x for v in h)
    return tuple(v * x for v in h)


def _recip(t: Real) -> Number:
    if isinstance(t, Rational):
        return 1 / Fraction(t)
    return 1.0 / float(t)


@dataclass(frozen=True)
class PeriodicMeasure:
    support: DisjointPartition
    period: Number
    speeds: tuple[float, ...]
    weights: tuple[float, ...]
    rotation: tuple
    action: float

    def check(self, tol: float = 1e-9) -> None:
        if abs(sum(self.weights) - 1) > 1e-12:
            raise MeasureError("weights do not sum to 1")
        dim = len(self.rotation)
        rot = [0.0] * dim
        for (c, _), w, s in zip(self.support.entries, self.weights, self.speeds):
            for i in range(dim):
                rot[i] += w * s * c.homology[i] / c.length
        if max((abs(float(a) - b) for a, b in zip(self.rotation, rot)), default=0.0) > tol:
            raise MeasureError("rotation vector inconsistent with speeds and weights")
        act = sum(w * s * s for w, s in zip(self.weights, self.speeds))
        if abs(act - self.action) > tol * max(1.0, act):
            raise MeasureError("action inconsistent with speeds and weights")

    def to_json(self) -> dict:
        return {
            "partition": self.support.to_json(),
            "period": _num_json(self.period),
            "speeds": [_num_json(s) for s in self.speeds],
            "weights": [_num_json(w) for w in self.weights],
            "rotation": [_num_json(r) for r in self.rotation],
            "action": _num_json(self.action),
        }


def _num_json(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return float(f"{float(x):.15g}")


def periodic_measure_of_curve(c: CurveClass, period: Real) -> PeriodicMeasure:
    """Evenly distributed measure on ``c`` traversed once in time ``period``."""
    _positive("period", period)
    speed = c.length / float(period)
    part = make_partition([(c, 1)])
    return PeriodicMeasure(part, period, (speed,), (1.0,),
                           _scale(c.homology, _recip(period)), speed * speed)


def shift_measure(mu: PeriodicMeasure, a: Real) -> PeriodicMeasure:
    """Reparametrise every orbit at ``a`` times the speed."""
    _positive("a", a)
    fa = float(a)
    rot = tuple(r * (Fraction(a) if isinstance(r, Fraction) and isinstance(a, Rational) else fa)
                for r in mu.rotation)
    period = mu.period / a if isinstance(mu.period, Fraction) and isinstance(a, Rational) else float(mu.period) / fa
    return replace(mu, period=period, speeds=tuple(s * fa for s in mu.speeds),
                   rotation=rot, action=mu.action * fa * fa)


def min_action_on_partition(part: DisjointPartition, h: Sequence[int], period: Real) -> PeriodicMeasure:
    """Least-action measure on ``part`` with rotation vector ``h / period``.

    Every orbit runs at the common speed |A| / T and entry i carries weight
    n_i |l_i| / |A|; the action is (|A| / T)^2.
    """
    _positive("period", period)
    if tuple(h) != part.homology:
        raise MeasureError("partition does not represent the requested class")
    total = part.total_length
    speed = total / float(period)
    weights = tuple(n * c.length / total for c, n in part.entries)
    s = sum(weights)
    weights = tuple(w / s for w in weights)
    return PeriodicMeasure(part, period, tuple(speed for _ in weights), weights,
                           _scale(h, _recip(period)), speed * speed)


def action_of(part: DisjointPartition, speeds: Sequence[float], period: Real) -> tuple[tuple, float]:
    """Weights forced by the rotation constraint for given speeds, and the action.

    Returns ``(weights, action)``; weights need not sum to 1 unless the speeds
    are admissible.
    """
    t = float(period)
    weights = tuple(n * c.length / (t * s) for (c, n), s in zip(part.entries, speeds))
    return weights, sum(w * s * s for w, s in zip(weights, speeds))


def compare_partitions(a: DisjointPartition, b: DisjointPartition, h: Sequence[int], period: Real) -> int:
    """-1, 0 or 1 as the least action on ``a`` is below, equal to or above ``b``'s."""
    ma = min_action_on_partition(a, h, period).action
    mb = min_action_on_partition(b, h, period).action
    if math.isclose(ma, mb, rel_tol=1e-12, abs_tol=1e-12):
        return 0
    return -1 if ma < mb else 1
