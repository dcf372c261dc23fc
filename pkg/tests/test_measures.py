import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from liftmin import words as W
from liftmin.words import Word
from liftmin.curves import CurveClass, Surface, curve_class, enumerate_partitions_below, make_partition
from liftmin.fuchsian import GeodesicClass
from liftmin.measures import (
    MeasureError,
    action_of,
    compare_partitions,
    min_action_on_partition,
    periodic_measure_of_curve,
    shift_measure,
)

SYSTOLE = 3.0571418389619986


@pytest.fixture(scope="module")
def a1(bolza):
    return curve_class(bolza, W.parse_word("a1"))


@pytest.fixture(scope="module")
def parts_a1(bolza):
    return enumerate_partitions_below(bolza, (1, 0, 0, 0), 6.2).partitions


def test_curve_measure(a1):
    mu = periodic_measure_of_curve(a1, Fraction(1, 2))
    mu.check()
    assert mu.rotation == (2, 0, 0, 0)
    assert mu.speeds[0] == pytest.approx(2 * SYSTOLE)
    assert mu.action == pytest.approx(4 * SYSTOLE ** 2)


def test_shift_by_two(a1):
    mu = periodic_measure_of_curve(a1, Fraction(1, 2))
    nu = shift_measure(mu, 2)
    nu.check()
    assert nu.period == Fraction(1, 4)
    assert nu.rotation == tuple(2 * r for r in mu.rotation)
    assert nu.action == pytest.approx(4 * mu.action, rel=1e-12)
    assert nu.action == pytest.approx(149.5378, abs=1e-4)


@given(st.floats(0.1, 10), st.floats(0.1, 10))
def test_shift_group_law(a1, a, b):
    mu = periodic_measure_of_curve(a1, 1.0)
    twice = shift_measure(shift_measure(mu, a), b)
    once = shift_measure(mu, a * b)
    assert twice.action == pytest.approx(once.action, rel=1e-12)
    back = shift_measure(shift_measure(mu, a), 1 / a)
    assert back.action == pytest.approx(mu.action, rel=1e-12)
    assert np.allclose(back.rotation, mu.rotation, atol=1e-12)
    assert float(back.period) == pytest.approx(float(mu.period), rel=1e-12)


def test_exact_periods_stay_exact(a1):
    nu = shift_measure(periodic_measure_of_curve(a1, Fraction(2, 3)), Fraction(3, 2))
    assert nu.period == Fraction(4, 9)
    assert nu.rotation == (Fraction(9, 4), 0, 0, 0)
    assert shift_measure(nu, Fraction(4, 9)).period == 1


@pytest.mark.parametrize("index", [0, 1, 2])
@pytest.mark.parametrize("period", [1.0, 0.5, 3.0])
def test_min_action_against_grid(parts_a1, index, period):
    part = parts_a1[index]
    mu = min_action_on_partition(part, (1, 0, 0, 0), period)
    mu.check()
    ref = oracles.grid_min_action([c.length for c, _ in part.entries],
                                  [n for _, n in part.entries], period)
    assert mu.action == pytest.approx(ref, rel=1e-6)
    assert mu.action == pytest.approx((part.total_length / period) ** 2, rel=1e-12)


def test_min_action_with_multiplicity(bolza, a1):
    part = make_partition([(a1, 2)])
    mu = min_action_on_partition(part, (2, 0, 0, 0), 1.0)
    assert mu.action == pytest.approx(oracles.grid_min_action([SYSTOLE], [2], 1.0), rel=1e-9)
    assert mu.action == pytest.approx((2 * SYSTOLE) ** 2)


def test_multi_curve_partition_against_grid(bolza):
    res = enumerate_partitions_below(bolza, (1, 1, 0, 0), 9.5)
    multi = [p for p in res if p.size >= 2]
    assert multi
    part = multi[0]
    mu = min_action_on_partition(part, (1, 1, 0, 0), 2.0)
    ref = oracles.grid_min_action([c.length for c, _ in part.entries], [n for _, n in part.entries], 2.0)
    assert mu.action == pytest.approx(ref, rel=1e-6)


@given(st.lists(st.floats(0.2, 5.0), min_size=3, max_size=3))
def test_admissible_speeds_cost_at_least_the_minimum(parts_a1, raw):
    # rescale arbitrary speeds until the forced weights sum to one
    part = parts_a1[1]
    speeds = raw[:part.size]
    w, _ = action_of(part, speeds, 1.0)
    scale = sum(w)
    speeds = [s * scale for s in speeds]
    w, act = action_of(part, speeds, 1.0)
    assert sum(w) == pytest.approx(1.0, rel=1e-9)
    best = min_action_on_partition(part, (1, 0, 0, 0), 1.0).action
    assert act >= best * (1 - 1e-12)


def test_compare_partitions_follows_length(bolza):
    res = enumerate_partitions_below(bolza, (1, 0, 0, 0), 8.0).partitions
    assert len(res) > 3
    for p in res:
        for q in res:
            by_action = compare_partitions(p, q, (1, 0, 0, 0), 0.7)
            diff = p.total_length - q.total_length
            by_length = 0 if math.isclose(p.total_length, q.total_length, rel_tol=1e-12) else (
                -1 if diff < 0 else 1)
            assert by_action == by_length


def test_measure_errors(a1, parts_a1):
    with pytest.raises(MeasureError):
        periodic_measure_of_curve(a1, 0)
    with pytest.raises(MeasureError):
        shift_measure(periodic_measure_of_curve(a1, 1.0), -1)
    with pytest.raises(MeasureError):
        min_action_on_partition(parts_a1[0], (0, 1, 0, 0), 1.0)
    with pytest.raises(MeasureError):
        min_action_on_partition(parts_a1[0], (1, 0, 0, 0), -2.0)


def test_check_catches_inconsistency(a1):
    from dataclasses import replace

    mu = periodic_measure_of_curve(a1, 1.0)
    with pytest.raises(MeasureError):
        replace(mu, action=mu.action + 1).check()
    with pytest.raises(MeasureError):
        replace(mu, weights=(0.5,)).check()
    with pytest.raises(MeasureError):
        replace(mu, rotation=(0, 1, 0, 0)).check()


def test_json_keeps_fractions(a1):
    doc = periodic_measure_of_curve(a1, Fraction(1, 3)).to_json()
    assert doc["period"] == "1/3"
    assert doc["rotation"] == [3, 0, 0, 0]


def synthetic(length, h, letter):
    geo = GeodesicClass(Word((letter,)), length, 2 * math.cosh(length / 2), h, Word((letter,)))
    return CurveClass(geo, h, simple=True)


def test_synthetic_curve_action():
    c = synthetic(3.0, (1, 0, 0, 0), 1)
    assert periodic_measure_of_curve(c, 1).action == 9.0
    unit = periodic_measure_of_curve(c, 3.0)
    assert unit.speeds == (1.0,) and unit.action == 1.0


def test_two_synthetic_curves():
    part = make_partition([(synthetic(2.0, (1, 0, 0, 0), 1), 1), (synthetic(3.0, (0, 0, 1, 0), 3), 1)])
    mu = min_action_on_partition(part, (1, 0, 1, 0), 1)
    mu.check()
    assert mu.speeds == (5.0, 5.0)
    assert mu.action == 25.0
    assert mu.weights == pytest.approx((0.4, 0.6))


def test_shift_by_one_is_identity(a1):
    mu = periodic_measure_of_curve(a1, Fraction(2, 3))
    assert shift_measure(mu, 1) == mu


@pytest.mark.parametrize("a", [Fraction(1, 3), 2, 2.5])
@pytest.mark.parametrize("index", [0, 1])
def test_min_action_commutes_with_shift(parts_a1, index, a):
    part, h, t = parts_a1[index], (1, 0, 0, 0), Fraction(3, 2)
    direct = min_action_on_partition(part, h, t * a)
    shifted = shift_measure(min_action_on_partition(part, h, t), 1 / Fraction(a))
    assert direct.action == pytest.approx(shifted.action, rel=1e-12)
    assert np.allclose([float(x) for x in direct.rotation], [float(x) for x in shifted.rotation], atol=1e-12)


def test_doubling_the_period_quarters_the_action(parts_a1):
    for part in parts_a1:
        one = min_action_on_partition(part, (1, 0, 0, 0), 1).action
        assert min_action_on_partition(part, (1, 0, 0, 0), 2).action == pytest.approx(one / 4, rel=1e-12)


def test_lift_action_matches_base(bolza, double_cover, a1):
    # a degree-2 lift traversed in time T moves like the base curve in time T/2
    (lift,) = Surface(bolza, double_cover).lifts(a1.geodesic)
    up = periodic_measure_of_curve(lift, 1)
    down = periodic_measure_of_curve(a1, Fraction(1, 2))
    assert up.action == pytest.approx(down.action, rel=1e-12)
