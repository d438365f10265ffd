"""Budget sets, the demand function and the argmax-on-sets map with its moduli."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EmptyBody, EmptyBudget, NotStrictlyConvex, ValidationError
from .geometry import (
    TAU_GEOM,
    BallHalfspace,
    BoxHalfspace,
    ConvexBody,
    IntervalBody,
    hausdorff_bound,
)
from .maximizer import maximize_body
from .preference import Preference, RotundityModulus


@dataclass(frozen=True)
class BudgetSpec:
    p: tuple
    w: float
    ambient: ConvexBody

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        object.__setattr__(self, "w", float(self.w))
        if len(self.p) != self.ambient.dimension:
            raise ValidationError("price vector and consumption set differ in dimension")
        if not all(map(math.isfinite, self.p + (self.w,))):
            raise ValidationError("prices and wealth must be finite")


def _price_range(body: ConvexBody, p: np.ndarray) -> tuple[float, float]:
    if isinstance(body, BallHalfspace):
        pc = float(p @ np.array(body.center))
        spread = float(np.linalg.norm(p)) * body.radius
        return pc - spread, pc + spread
    bounds = body.axis_bounds()
    lo = math.fsum(min(pi * iv.lo, pi * iv.hi) for pi, iv in zip(p, bounds))
    hi = math.fsum(max(pi * iv.lo, pi * iv.hi) for pi, iv in zip(p, bounds))
    return lo, hi


def budget_body(spec: BudgetSpec) -> ConvexBody:
    """The budget set {x in X : p.x <= w} in the shape grammar.

    The cut is stored normalized (|p| = 1) so that (lam p, lam w) builds the
    same set. A constraint that is slack on all of X returns X itself.
    """
    X = spec.ambient
    p = np.array(spec.p)
    norm = float(np.linalg.norm(p))
    if norm == 0.0:
        if spec.w < 0:
            raise EmptyBudget(f"0 <= {spec.w} fails: empty budget set")
        return X
    pn = tuple(float(v) for v in p / norm)
    wn = spec.w / norm
    lo, hi = _price_range(X, np.array(pn))
    if lo > wn + TAU_GEOM * max(1.0, abs(wn)):
        raise EmptyBudget(f"cheapest bundle costs {lo * norm} > wealth {spec.w}")
    if hi <= wn:
        return X
    if getattr(X, "is_cut", False):
        raise ValidationError("consumption set already carries a half-space cut; one cut per body")
    try:
        if isinstance(X, IntervalBody):
            bound = wn / pn[0]
            return IntervalBody(X.lo, min(X.hi, bound)) if pn[0] > 0 else IntervalBody(max(X.lo, bound), X.hi)
        if isinstance(X, BoxHalfspace):
            return BoxHalfspace(X.lower, X.upper, pn, max(wn, lo))
        if isinstance(X, BallHalfspace):
            return BallHalfspace(X.center, X.radius, pn, max(wn, lo))
    except EmptyBody as exc:
        raise EmptyBudget(str(exc)) from exc
    raise ValidationError(f"unsupported consumption set {type(X).__name__}")


def demand(pref: Preference, spec: BudgetSpec, tol: float) -> tuple:
    """F(p, w): the preference-maximal bundle of the budget set."""
    return maximize_body(pref, budget_body(spec), tol).xi


def gamma(pref: Preference, body: ConvexBody, tol: float) -> tuple:
    """Maximal point of an arbitrary inhabited compact convex body."""
    return maximize_body(pref, body, tol).xi


def gamma_modulus(rot: RotundityModulus | Callable[[float], float], eps: float) -> float:
    """delta = min(eps, delta'(eps)) / 2."""
    if eps <= 0:
        raise ValidationError("eps must be positive")
    return min(eps, rot(eps)) / 2


# -- continuity harness -----------------------------------------------------


@dataclass
class ModulusReport:
    eps: float
    delta: float
    trials: int
    failures: int
    worst_pair: Optional[dict] = None
    drawn: int = 0
    errors: int = 0
    rows: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "delta": self.delta,
            "trials": self.trials,
            "failures": self.failures,
            "drawn": self.drawn,
            "errors": self.errors,
            "worstPair": self.worst_pair,
        }

    def rows_csv(self) -> str:
        lines = ["trial,rho_h,rho_h_upper,dxi"]
        lines += [f"{i},{r!r},{u!r},{d!r}" for i, r, u, d in self.rows]
        return "\n".join(lines) + "\n"


def random_halfspace(rng: np.random.Generator, ambient: ConvexBody, min_thickness: float) -> ConvexBody:
    """Random unit-normal cut of a ball or box ambient with a cap at least
    ``min_thickness`` deep in the normal direction."""
    n = ambient.dimension
    d = rng.standard_normal(n)
    d /= np.linalg.norm(d)
    lo, hi = _price_range(ambient, d)
    w = rng.uniform(lo + max(min_thickness, 0.1 * (hi - lo)), hi)
    return _cut(ambient, tuple(d), w)


def _cut(ambient: ConvexBody, p: tuple, w: float) -> ConvexBody:
    if isinstance(ambient, BallHalfspace):
        return BallHalfspace(ambient.center, ambient.radius, p, w)
    if isinstance(ambient, BoxHalfspace):
        return BoxHalfspace(ambient.lower, ambient.upper, p, w)
    raise ValidationError("random cuts need a ball or box ambient")


def perturb_halfspace(rng: np.random.Generator, body: ConvexBody, scale: float) -> ConvexBody:
    """Tilt the cut normal and shift its offset, both by at most ``scale``."""
    p = np.array(body.p)
    tilt = rng.standard_normal(len(p))
    tilt -= (tilt @ p) * p
    if np.linalg.norm(tilt) > 0:
        tilt *= rng.uniform(0, scale) / np.linalg.norm(tilt)
    q = p + tilt
    q /= np.linalg.norm(q)
    lo, _ = _price_range(body_ambient(body), q)
    w = max(body.w + rng.uniform(-scale, scale), lo)
    return _cut(body_ambient(body), tuple(q), w)


def body_ambient(body: ConvexBody) -> ConvexBody:
    if isinstance(body, BallHalfspace):
        return BallHalfspace.ball(body.center, body.radius)
    if isinstance(body, BoxHalfspace):
        return BoxHalfspace.box(list(zip(body.lower, body.upper)))
    return body


def random_halfspace_pair(rng: np.random.Generator, ambient: ConvexBody, delta: float, tol: float):
    base = random_halfspace(rng, ambient, 10 * tol)
    return base, perturb_halfspace(rng, base, delta / 2)


PairSampler = Callable[[np.random.Generator, ConvexBody, float, float], tuple]


def _evaluate_pair(args) -> tuple:
    pref, a, b, tol = args
    try:
        xa = maximize_body(pref, a, tol).xi
        xb = maximize_body(pref, b, tol).xi
    except NotStrictlyConvex:
        return None
    return xa, xb


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _continuity_sweep(
    pref: Preference,
    ambient: ConvexBody,
    eps: float,
    delta: float,
    trials: int,
    tol: float,
    seed: int,
    sampler: PairSampler,
    workers: int,
    max_attempts: int,
) -> ModulusReport:
    net_eps = delta / 10
    kept = []
    drawn = 0
    while len(kept) < trials and drawn < max_attempts:
        rng = np.random.default_rng([seed, drawn])
        drawn += 1
        a, b = sampler(rng, ambient, delta, tol)
        est, upper = hausdorff_bound(a, b, net_eps)
        if est < delta - 2 * net_eps:
            kept.append((a, b, est, upper))
    results = _map(_evaluate_pair, [(pref, a, b, tol) for a, b, _, _ in kept], workers)
    report = ModulusReport(eps, delta, len(kept), 0, drawn=drawn)
    worst = -1.0
    for i, ((a, b, est, upper), res) in enumerate(zip(kept, results)):
        if res is None:
            report.errors += 1
            continue
        xa, xb = res
        dxi = math.dist(xa, xb)
        report.rows.append((i, est, upper, dxi))
        if dxi > eps + 2 * tol:
            report.failures += 1
        if dxi > worst:
            worst = dxi
            report.worst_pair = {
                "bodies": [a.to_json(), b.to_json()],
                "rhoH": est,
                "argmaxDistance": dxi,
                "argmaxes": [list(xa), list(xb)],
            }
    return report


def verify_gamma_uniform_continuity(
    pref: Preference,
    ambient: ConvexBody,
    eps: float,
    trials: int,
    tol: float,
    seed: int = 0,
    delta: Optional[float] = None,
    sampler: Optional[PairSampler] = None,
    workers: int = 1,
) -> ModulusReport:
    """Empirical check that delta-close bodies have eps-close maximal points.

    Pairs (S, S') are drawn until ``trials`` of them are certified
    delta-close: the boundary-sampled Hausdorff estimate (net spacing
    delta/10) must sit below delta minus twice the net spacing. A pair fails
    when the maximal points are more than eps + 2 tol apart. ``delta``
    defaults to min(eps, delta'(eps)) / 2 from the preference's rotundity
    modulus. Attempt k draws from ``default_rng([seed, k])``, so the outcome
    does not depend on ``workers``.
    """
    if trials == 0:
        return ModulusReport(eps, delta or 0.0, 0, 0)
    if delta is None:
        if pref.rotundity is None:
            raise ValidationError("preference carries no rotundity modulus; pass delta explicitly")
        delta = gamma_modulus(pref.rotundity, eps)
    if eps <= 10 * tol:
        raise ValidationError("eps must exceed 10 * tol so solver noise cannot mask the claim")
    return _continuity_sweep(
        pref, ambient, eps, delta, trials, tol, seed, sampler or random_halfspace_pair, workers, 50 * trials
    )


def verify_gamma_pointwise(
    pref: Preference,
    body: ConvexBody,
    modulus_at: Callable[[tuple], RotundityModulus],
    eps: float,
    trials: int,
    tol: float,
    seed: int = 0,
    workers: int = 1,
) -> ModulusReport:
    """Fixed body S, perturbed bodies S' within the pointwise delta at Gamma(S).

    ``modulus_at(xi)`` supplies the rotundity modulus at the base point xi.
    """
    xi = gamma(pref, body, tol)
    delta = gamma_modulus(modulus_at(xi), eps)
    return _continuity_sweep(pref, body, eps, delta, trials, tol, seed, _FixedSampler(body), workers, 50 * trials)


@dataclass(frozen=True)
class _FixedSampler:
    body: ConvexBody

    def __call__(self, rng, ambient, delta, tol):
        return self.body, perturb_halfspace(rng, self.body, delta / 2)


# -- continuity transfer to the demand function -----------------------------


@dataclass(frozen=True)
class TransferTable:
    p: tuple
    rows: tuple  # (eps, delta_gamma, delta_w)
    bound: str

    def to_json(self) -> dict:
        return {
            "p": list(self.p),
            "bound": self.bound,
            "rows": [{"eps": e, "deltaGamma": d, "deltaW": dw} for e, d, dw in self.rows],
        }


def wealth_hausdorff_factor(p: Sequence[float], ambient: ConvexBody) -> float:
    """k with rho_H(beta(p, w), beta(p, w')) <= |w - w'| / k on a box ambient.

    Scaling a bundle toward the box's cheapest corner l by the factor
    (w - p.l) / (w' - p.l) moves it by at most |w - w'| / min_i p_i, so
    k = min_i p_i for strictly positive prices.
    """
    if not isinstance(ambient, BoxHalfspace) or ambient.is_cut:
        raise ValidationError("the wealth-direction bound is implemented for uncut box ambients")
    if min(p) <= 0:
        raise ValidationError("the wealth-direction bound needs strictly positive prices")
    return float(min(p))


def f_continuity_transfer(
    report: ModulusReport,
    p: Sequence[float],
    ambient: ConvexBody,
    rot: Optional[RotundityModulus] = None,
    eps_grid: Sequence[float] = (),
) -> TransferTable:
    """(eps, delta_Gamma, delta_w) rows: |w - w'| < delta_w keeps F within eps.

    The report's own (eps, delta) is always the first row; with ``rot`` the
    table is extended over ``eps_grid``.
    """
    if report.failures:
        raise ValidationError("cannot transfer a modulus from a failing report")
    k = wealth_hausdorff_factor(p, ambient)
    rows = [(report.eps, report.delta, report.delta * k)]
    if rot is not None:
        for e in eps_grid:
            d = gamma_modulus(rot, e)
            rows.append((e, d, d * k))
    return TransferTable(tuple(float(v) for v in p), tuple(rows), "min-price")
