"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line (also repeated in the
pytest terminal summary) before asserting, so a red run still says which
criterion broke and by how much.
"""

import math
import time

import numpy as np
from conftest import VERDICTS

from constructive_demand.demand import BudgetSpec, demand, verify_gamma_uniform_continuity
from constructive_demand.equilibrium import check_equilibrium, labor_economy, search_equilibrium
from constructive_demand.foundations import (
    BARS,
    PREDICATES,
    NotBarWithin,
    UniformAt,
    cantor_encode,
    covers_unit_interval,
    decade_sweep,
    default_delta_grid,
    demonstrate_instability,
    find_uniform_bound,
    predicate_uniform_delta,
    words,
)
from constructive_demand.geometry import BallHalfspace, BoxHalfspace, Interval, hausdorff
from constructive_demand.maximizer import check_dominance, maximize_body, maximize_interval
from constructive_demand.preference import NegQuadratic, UtilityPreference, neg_quadratic_concavity, parse_utility, uniform_modulus


def verdict(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line)
    VERDICTS.append(line)
    return ok


# -- 1 ----------------------------------------------------------------------


def _utility_family(rng, lo, hi):
    c = float(rng.uniform(lo, hi))
    kind = int(rng.integers(5))
    if kind == 0:
        return (lambda t: -((t - c) ** 2)), f"quadratic peak {c:.4f}"
    if kind == 1:
        return (lambda t: -np.abs(t - c) ** 1.5), f"power-1.5 peak {c:.4f}"
    if kind == 2:
        return (lambda t: np.exp(-((t - c) ** 2))), f"gaussian peak {c:.4f}"
    if kind == 3:
        return (lambda t: -np.cosh(t - c)), f"cosh peak {c:.4f}"
    s = float(rng.choice([-1.0, 1.0]))
    return (lambda t: s * t ** 3), f"monotone cubic sign {s:+.0f}"


def _grid_argmax(u, lo, hi, spacing):
    n = int(math.ceil((hi - lo) / spacing)) + 1
    best_t, best_u = lo, -math.inf
    for start in range(0, n, 1_000_000):
        ts = lo + np.arange(start, min(n, start + 1_000_000)) * spacing
        ts = ts[ts <= hi]
        if len(ts) == 0:
            break
        us = u(ts)
        k = int(np.argmax(us))
        if us[k] > best_u:
            best_t, best_u = float(ts[k]), float(us[k])
    return best_t


def test_criterion_1_one_dimensional_maximizer_matches_brute_force():
    tol = 1e-6
    rng = np.random.default_rng(2024)
    worst, elapsed = 0.0, 0.0
    for _ in range(50):
        lo = float(rng.uniform(-2, 2))
        hi = lo + float(rng.uniform(0.1, 1.0))
        u, _ = _utility_family(rng, lo, hi)
        start = time.perf_counter()
        xi = maximize_interval(lambda s, t: u(s) > u(t), Interval(lo, hi), tol).xi[0]
        elapsed += time.perf_counter() - start
        worst = max(worst, abs(xi - _grid_argmax(u, lo, hi, tol / 10)))
    ok = worst <= 2 * tol and elapsed < 5
    assert verdict(1, ok, f"max |xi - grid argmax| = {worst:.3g} (<= {2 * tol:g}), maximizer time {elapsed:.2f}s (< 5s)")


# -- 2 ----------------------------------------------------------------------


def test_criterion_2_bracket_law_is_exact():
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(50):
        lo = float(rng.uniform(-5, 5))
        hi = lo + float(rng.uniform(0.01, 10))
        peak = float(rng.uniform(lo, hi))
        res = maximize_interval(lambda s, t: -((s - peak) ** 2) > -((t - peak) ** 2), Interval(lo, hi), 1e-13 * (hi - lo), record=True)
        trace = res.trace[:41]
        width = trace[0][1]
        for (l0, w0), (l1, w1) in zip(trace, trace[1:]):
            width *= 0.75
            if not (w1 == width == w0 * 0.75 and l1 in (l0, l0 + w0 / 4)):
                bad += 1
        if len(trace) < 41:
            bad += 1
    assert verdict(2, bad == 0, f"{bad} steps break width_(k+1) = 3/4 width_k over 50 runs of 40 steps")


# -- 3 ----------------------------------------------------------------------


def _kkt_instances(rng, n, count):
    for _ in range(count):
        a = rng.uniform(0.2, 1.0, n)
        p = rng.uniform(0.3, 3.0, n)
        w = float(rng.uniform(0.5, 2.0))
        oracle = a / a.sum() * w / p
        X = BoxHalfspace.box([(0.0, 1.5 * float(oracle.max()) + 0.5)] * n)
        yield "cobb-douglas(" + ",".join(map(repr, map(float, a))) + ")", p, w, X, oracle


def test_criterion_3_demand_matches_the_kkt_oracle():
    tol = 1e-4
    rng = np.random.default_rng(33)
    start = time.perf_counter()
    worst = 0.0
    for n, count in ((2, 100), (3, 20)):
        for spec, p, w, X, oracle in _kkt_instances(rng, n, count):
            xi = demand(parse_utility(spec), BudgetSpec(p, w, X), tol)
            worst = max(worst, float(np.linalg.norm(np.array(xi) - oracle)))
    elapsed = time.perf_counter() - start
    ok = worst <= 5 * tol and elapsed < 60
    assert verdict(3, ok, f"max |F - analytic| = {worst:.3g} (<= {5 * tol:g}) on 100 + 20 instances in {elapsed:.1f}s (< 60s)")


# -- 4 ----------------------------------------------------------------------

DOMINANCE_CASES = [
    ("cobb-douglas(0.5,0.5)", BoxHalfspace((0, 0), (1, 1), (1, 1), 1.0)),
    ("cobb-douglas(0.2,0.8)", BoxHalfspace((0, 0), (2, 2), (1, 3), 2.0)),
    ("cobb-douglas(0.2,0.3,0.5)", BoxHalfspace((0, 0, 0), (1, 1, 1), (1, 1, 1), 1.0)),
    ("cobb-douglas(0.5,0.5;1,0)", BoxHalfspace((-1, 0), (0, 1), (1, 1), 0.0)),
    ("neg-quadratic(0.3,0)", BallHalfspace.ball((0.0, 0.0), 1.0)),
    ("neg-quadratic(2,2)", BallHalfspace((0.0, 0.0), 1.0, (1.0, 0.0), 0.2)),
    ("neg-quadratic(0.25,0.25)", BoxHalfspace((0, 0), (1, 1), (1, 1), 1.0)),
    ("neg-quadratic(1,1,1)", BallHalfspace.ball((0.0, 0.0, 0.0), 1.0)),
]


def test_criterion_4_dominance_at_the_maximizer():
    failures = []
    for spec, body in DOMINANCE_CASES:
        pref = parse_utility(spec)
        xi = maximize_body(pref, body, 1e-6).xi
        rep = check_dominance(pref, body, xi, 1000, 1e-2, np.random.default_rng(4))
        if rep.failures or rep.samples != 1000:
            failures.append(f"{spec}: {rep.failures}/{rep.samples}")
    detail = "0 failures in 1000 samples for each of " + str(len(DOMINANCE_CASES)) + " cases"
    assert verdict(4, not failures, detail if not failures else "; ".join(failures))


# -- 5 ----------------------------------------------------------------------


def test_criterion_5_homogeneity_of_degree_zero():
    tol = 1e-5
    rng = np.random.default_rng(55)
    worst = 0.0
    for _ in range(50):
        a = rng.uniform(0.2, 1.0, 2)
        pref = parse_utility(f"cobb-douglas({float(a[0])!r},{float(a[1])!r})")
        X = BoxHalfspace.box([(0.0, 1.0), (0.0, 1.0)])
        p = rng.uniform(0.3, 3.0, 2)
        w = float(rng.uniform(0.2, 1.0))
        base = demand(pref, BudgetSpec(p, w, X), tol)
        for lam in (0.5, 2.0, 10.0):
            worst = max(worst, math.dist(base, demand(pref, BudgetSpec(lam * p, lam * w, X), tol)))
    assert verdict(5, worst <= 2 * tol, f"max |F(lam p, lam w) - F(p, w)| = {worst:.3g} (<= {2 * tol:g}) over 50 instances")


# -- 6 ----------------------------------------------------------------------


def test_criterion_6_gamma_uniform_continuity():
    disk = BallHalfspace.ball((0.0, 0.0), 1.0)
    nq = NegQuadratic((0.3, 0.0))
    pref = UtilityPreference(nq, 2).with_rotundity(uniform_modulus(neg_quadratic_concavity(nq, disk)))
    start = time.perf_counter()
    rep = verify_gamma_uniform_continuity(pref, disk, 0.1, 500, 1e-4, seed=42)
    elapsed = time.perf_counter() - start
    worst = max(r[3] for r in rep.rows)
    ok = rep.trials == 500 and rep.failures == 0 and rep.errors == 0 and elapsed < 120
    assert verdict(
        6,
        ok,
        f"{rep.failures} failures over {rep.trials} pairs at delta = {rep.delta:.4g}, "
        f"max |dGamma| = {worst:.3g}, {elapsed:.1f}s (< 120s)",
    )


# -- 7 ----------------------------------------------------------------------


def test_criterion_7_counterexample_dichotomy():
    bad = []
    for dx in decade_sweep(1e-1, 1e-12):
        rep = demonstrate_instability(dx, 1e-9)
        if not (rep.argmax_plus == 0.0 and rep.argmax_minus == 1.0 and rep.jump == 1.0):
            bad.append(dx)
    assert verdict(7, not bad, f"argmax 0 / 1 and jump 1 exactly for 12 decades; offenders {bad}")


# -- 8 ----------------------------------------------------------------------


def test_criterion_8_labor_equilibrium():
    econ = labor_economy()
    tol = 1e-6
    start = time.perf_counter()
    out = search_equilibrium(econ, 1e-2, 7, tol)
    elapsed = time.perf_counter() - start
    cell = 2.0 ** -7
    ok = (
        out.candidate is not None
        and check_equilibrium(econ, out.candidate, 1e-2, tol).passed
        and max(abs(v - 0.5) for v in out.candidate.p) <= cell
        and elapsed < 30
    )
    p = None if out.candidate is None else out.candidate.p
    mode = None if out.report is None else out.report.mode
    assert verdict(8, ok, f"p = {p} (mode {mode}), within {cell:g} of (1/2, 1/2), {elapsed:.1f}s (< 30s)")


# -- 9 ----------------------------------------------------------------------


def test_criterion_9_fan_machinery():
    depth3 = find_uniform_bound(BARS["depth3"], 20)
    ones = find_uniform_bound(BARS["contains-one"], 20)
    covers = covers_unit_interval([cantor_encode(w) for w in words(10)])
    step = 0.002
    delta = predicate_uniform_delta(PREDICATES["lipschitz-sq"], 0.1, 1e-3, default_delta_grid(step))
    ok = (
        depth3 == UniformAt(3)
        and isinstance(ones, NotBarWithin)
        and ones.depth == 20
        and covers
        and delta is not None
        and abs(delta - 0.05) <= step
    )
    assert verdict(9, ok, f"depth3 -> {depth3}, contains-one -> {ones}, depth-10 cover {covers}, lipschitz-sq delta {delta}")


# -- 10 ---------------------------------------------------------------------


def test_criterion_10_hausdorff_metric_axioms():
    rng = np.random.default_rng(10)
    bad = 0
    for _ in range(1000):
        a, b, c = (rng.uniform(-10, 10, (int(rng.integers(1, 9)), 2)) for _ in range(3))
        if hausdorff(a, b) != hausdorff(b, a) or hausdorff(a, a) != 0.0:
            bad += 1
        if hausdorff(a, c) > hausdorff(a, b) + hausdorff(b, c):
            bad += 1
    assert verdict(10, bad == 0, f"{bad} violations of symmetry / identity / triangle inequality on 1000 triples")
