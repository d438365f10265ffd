import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constructive_demand.errors import NotStrictlyConvex, ValidationError
from constructive_demand.geometry import BallHalfspace, BoxHalfspace, Interval, IntervalBody
from constructive_demand.maximizer import (
    Decision,
    check_dominance,
    maximize_body,
    maximize_interval,
    quarter_decision,
)
from constructive_demand.preference import parse_utility


def by_utility(u):
    return lambda s, t: u(s) > u(t)


def grid_argmax(u, lo, hi, spacing):
    ts = np.linspace(lo, hi, int(round((hi - lo) / spacing)) + 1)
    return float(ts[np.argmax(u(ts))])


# -- quarter decision ---------------------------------------------------------


def test_symmetric_peak_keeps_right():
    assert quarter_decision(by_utility(lambda t: -(t - 0.5) ** 2), Interval(0, 1)) is Decision.KEEP_RIGHT


def test_decreasing_keeps_left():
    assert quarter_decision(by_utility(lambda t: -t), Interval(0, 1)) is Decision.KEEP_LEFT


def test_trough_is_not_strictly_convex():
    with pytest.raises(NotStrictlyConvex):
        quarter_decision(by_utility(lambda t: abs(t - 0.5)), Interval(0, 1))


def test_quarter_decision_needs_width():
    with pytest.raises(ValidationError):
        quarter_decision(by_utility(lambda t: t), Interval(0.5, 0.5))


# -- one dimension ------------------------------------------------------------


def test_interior_peak_matches_grid():
    u = lambda t: -((t - 0.3) ** 2)
    res = maximize_interval(by_utility(u), Interval(0, 1), 1e-6)
    assert abs(res.xi[0] - grid_argmax(u, 0.0, 1.0, 1e-7)) <= 1e-6
    assert res.bracket_width <= 1e-6


def test_increasing_reaches_the_endpoint():
    res = maximize_interval(by_utility(lambda t: t), Interval(0, 1), 1e-6)
    assert res.xi == (1.0,)


def test_decreasing_reaches_the_left_endpoint():
    res = maximize_interval(by_utility(lambda t: -t), Interval(0, 1), 1e-6)
    assert res.xi == (0.0,)


def test_degenerate_interval_costs_nothing():
    res = maximize_interval(by_utility(lambda t: t), Interval(0.5, 0.5), 1e-6)
    assert res.xi == (0.5,)
    assert res.comparisons == 0


def test_step_count():
    res = maximize_interval(by_utility(lambda t: -((t - 0.3) ** 2)), Interval(0, 1), 1e-6, record=True)
    assert len(res.trace) - 1 == math.ceil(math.log(1e6) / math.log(4 / 3))


def test_xi_is_a_float_for_integer_endpoints():
    res = maximize_interval(by_utility(lambda t: -((t - 0.3) ** 2)), Interval(0, 1), 1e-3)
    assert type(res.xi[0]) is float


def test_tol_must_be_positive():
    with pytest.raises(ValidationError):
        maximize_interval(by_utility(lambda t: t), Interval(0, 1), 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(0.01, 10), st.floats(0, 1), st.floats(0.1, 10))
def test_matches_grid_for_random_peaks(lo, width, frac, curvature):
    hi = lo + width
    peak = lo + frac * width
    u = lambda t: -curvature * (t - peak) ** 2
    tol = 1e-4 * width
    res = maximize_interval(by_utility(u), Interval(lo, hi), tol)
    assert abs(res.xi[0] - peak) <= 2 * tol


@settings(max_examples=100, deadline=None)
@given(st.floats(-100, 100), st.floats(0.5, 50), st.floats(0, 1))
def test_affine_rescaling_commutes(a, scale, peak01):
    u01 = lambda s: -((s - peak01) ** 2)
    direct = maximize_interval(by_utility(u01), Interval(0.0, 1.0), 1e-7).xi[0]
    ua = lambda t: u01((t - a) / scale)
    mapped = maximize_interval(by_utility(ua), Interval(a, a + scale), 1e-7 * scale).xi[0]
    assert (mapped - a) / scale == pytest.approx(direct, abs=1e-9 + 4e-7)


def test_bracket_shrinks_by_exactly_three_quarters():
    rng = np.random.default_rng(0)
    for _ in range(20):
        lo = float(rng.uniform(-3, 3))
        hi = lo + float(rng.uniform(0.1, 5))
        peak = float(rng.uniform(lo, hi))
        res = maximize_interval(by_utility(lambda t: -((t - peak) ** 2)), Interval(lo, hi), 1e-12 * (hi - lo), record=True)
        widths = [w for _, w in res.trace]
        assert len(widths) > 40
        for k in range(len(widths) - 1):
            assert widths[k + 1] == widths[k] * 0.75


def test_bracket_holds_the_maximizer():
    peak = 0.123456
    res = maximize_interval(by_utility(lambda t: -((t - peak) ** 2)), Interval(0, 1), 1e-9, record=True)
    for lo, w in res.trace:
        assert lo <= peak <= lo + w


# -- n dimensions -----------------------------------------------------------


CUT_SQUARE = BoxHalfspace((0, 0), (1, 1), (1, 1), 1.0)


def test_cobb_douglas_on_the_triangle():
    res = maximize_body(parse_utility("cobb-douglas(0.5,0.5)"), CUT_SQUARE, 1e-4)
    assert math.dist(res.xi, (0.5, 0.5)) <= 1e-3
    assert res.bracket_width <= 1e-4


def test_interior_peak_in_the_triangle():
    res = maximize_body(parse_utility("neg-quadratic(0.25,0.25)"), CUT_SQUARE, 1e-6)
    assert math.dist(res.xi, (0.25, 0.25)) <= 1e-6


def test_peak_outside_projects_onto_the_cut():
    body = BoxHalfspace((0, 0), (2, 2), (1, 1), 2.0)
    res = maximize_body(parse_utility("neg-quadratic(2,2)"), body, 1e-6)
    assert math.dist(res.xi, (1.0, 1.0)) <= 1e-6


def test_three_goods():
    body = BoxHalfspace((0, 0, 0), (1, 1, 1), (1, 1, 1), 1.0)
    res = maximize_body(parse_utility("cobb-douglas(0.2,0.3,0.5)"), body, 1e-3)
    assert math.dist(res.xi, (0.2, 0.3, 0.5)) <= 5e-3


def test_disk_with_peak_outside():
    res = maximize_body(parse_utility("neg-quadratic(2,0)"), BallHalfspace.ball((0, 0), 1), 1e-6)
    assert math.dist(res.xi, (1.0, 0.0)) <= 1e-6


def test_result_lies_in_the_body():
    rng = np.random.default_rng(3)
    for _ in range(20):
        peak = tuple(rng.uniform(-1, 2, 2))
        body = BallHalfspace((0.0, 0.0), 1.0, tuple(rng.normal(size=2)), float(rng.uniform(-0.5, 0.5)))
        res = maximize_body(parse_utility(f"neg-quadratic({peak[0]},{peak[1]})"), body, 1e-6)
        assert body.contains(res.xi)


def test_runs_are_bitwise_reproducible_and_refine():
    pref = parse_utility("cobb-douglas(0.3,0.7)")
    a = maximize_body(pref, CUT_SQUARE, 1e-4)
    b = maximize_body(pref, CUT_SQUARE, 1e-4)
    c = maximize_body(pref, CUT_SQUARE, 1e-5)
    assert a == b
    assert math.dist(a.xi, c.xi) <= 2e-4


def test_one_dimensional_body_delegates():
    res = maximize_body(parse_utility("neg-quadratic(0.3)"), IntervalBody(0, 1), 1e-6)
    assert res.xi[0] == pytest.approx(0.3, abs=1e-6)


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        maximize_body(parse_utility("linear(1)"), CUT_SQUARE, 1e-3)


def test_result_json_fields():
    res = maximize_body(parse_utility("neg-quadratic(0.3)"), IntervalBody(0, 1), 1e-3)
    assert set(res.to_json()) == {"xi", "bracketWidth", "comparisons"}


# -- dominance ----------------------------------------------------------------


def test_dominance_holds_at_the_maximizer():
    pref = parse_utility("cobb-douglas(0.5,0.5)")
    xi = maximize_body(pref, CUT_SQUARE, 1e-6).xi
    rep = check_dominance(pref, CUT_SQUARE, xi, 1000, 1e-2, np.random.default_rng(0))
    assert rep.samples == 1000 and rep.failures == 0 and rep.ok


def test_dominance_catches_a_perturbed_point():
    pref = parse_utility("cobb-douglas(0.5,0.5)")
    xi = maximize_body(pref, CUT_SQUARE, 1e-6).xi
    moved = (xi[0] - 0.1, xi[1])
    rep = check_dominance(pref, CUT_SQUARE, moved, 1000, 1e-2, np.random.default_rng(0))
    assert rep.failures > 0
    assert pref.compare(rep.worst, moved)


def test_dominance_is_vacuous_beyond_the_diameter():
    pref = parse_utility("cobb-douglas(0.5,0.5)")
    rep = check_dominance(pref, CUT_SQUARE, (0.5, 0.5), 100, 10.0, np.random.default_rng(0))
    assert rep.samples == 0 and rep.ok
