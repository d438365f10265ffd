"""Failure cases and fan-theorem machinery at finite depth.

* the linear family t -> -x t on [0,1], whose maximizer jumps from 1 to 0 as
  x crosses zero, so merely convex preferences admit no continuity modulus;
* the Cantor-space encoding onto [0,1], bars and a breadth-first search for
  a uniform bound;
* continuous predicates on [0,1]^n with a grid search for a uniform delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .geometry import BoxHalfspace, ConvexBody, Interval
from .maximizer import maximize_interval
from .preference import Linear, NegQuadratic, UtilityPreference

# -- the counterexample family ----------------------------------------------


@dataclass(frozen=True)
class CounterexampleParam:
    x: float

    def __post_init__(self) -> None:
        if not abs(self.x) < 0.25:
            raise ValidationError(f"counterexample parameter must satisfy |x| < 1/4, got {self.x}")


@dataclass(frozen=True)
class PiecewiseCounterexample:
    """The three-piece formula with s = max(x, 0), kept verbatim for inspection.

    It is discontinuous at t = 1 - s and has f(0) = -x < 0 for x > 0, so it
    does not have the maximizers the family is meant to exhibit.
    """

    x: float

    def __call__(self, t) -> float:
        t = t[0] if isinstance(t, (tuple, list)) else t
        s = max(self.x, 0.0)
        sign = (self.x > 0) - (self.x < 0)
        if t <= s:
            return sign * (t - s)
        if t <= 1 - s:
            return 0.0
        return -sign * (t - s)


def counterexample_utility(x: float, paper_literal: bool = False) -> Callable:
    """f_x(t) = -x t on [0,1]: argmax 0 for x > 0, argmax 1 for x < 0, flat at 0."""
    param = CounterexampleParam(x)
    if paper_literal:
        return PiecewiseCounterexample(param.x)
    return Linear((-param.x,))


def counterexample_preference(x: float, paper_literal: bool = False) -> UtilityPreference:
    return UtilityPreference(
        counterexample_utility(x, paper_literal),
        1,
        strictly_quasi_concave=False,
        name=f"counterexample({x!r})",
    )


@dataclass(frozen=True)
class InstabilityReport:
    delta_x: float
    argmax_plus: float
    argmax_minus: float
    jump: float
    contrast_jump: float
    tol: float

    def to_json(self) -> dict:
        return {
            "deltaX": self.delta_x,
            "argmaxPlus": self.argmax_plus,
            "argmaxMinus": self.argmax_minus,
            "jump": self.jump,
            "contrastJump": self.contrast_jump,
            "tol": self.tol,
        }


def _argmax_1d(utility: Callable, tol: float) -> float:
    pref = UtilityPreference(utility, 1)
    return maximize_interval(lambda s, t: pref.compare((s,), (t,)), Interval(0.0, 1.0), tol).xi[0]


def demonstrate_instability(delta_x: float, tol: float) -> InstabilityReport:
    """Maximize f at +delta_x and -delta_x and report how far the argmax jumps.

    The contrast run moves the peak of -(t - 1/2)^2 by +-delta_x; its
    maximizer moves by about 2 delta_x only.
    """
    if not 0 < delta_x < 0.25:
        raise ValidationError("delta_x must lie in (0, 1/4)")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    plus = _argmax_1d(counterexample_utility(delta_x), tol)
    minus = _argmax_1d(counterexample_utility(-delta_x), tol)
    c_plus = _argmax_1d(NegQuadratic((0.5 + delta_x,)), tol)
    c_minus = _argmax_1d(NegQuadratic((0.5 - delta_x,)), tol)
    return InstabilityReport(delta_x, plus, minus, abs(plus - minus), abs(c_plus - c_minus), tol)


def decade_sweep(hi: float, lo: float) -> list[float]:
    """hi, hi/10, ..., down to lo (both powers of ten)."""
    top, bottom = round(math.log10(hi)), round(math.log10(lo))
    if top < bottom:
        raise ValidationError("sweep must run from the larger to the smaller value")
    return [float(f"1e{k}") for k in range(top, bottom - 1, -1)]


def flip_pair(rng: np.random.Generator, ambient: ConvexBody, delta: float, tol: float):
    """Two cuts of the box [0,1] x [-1,1] that are Hausdorff-close but flip
    the maximizer of the linear preference u(x) = x_2 between (0, 0) and
    (1, eta). Used to show the continuity harness catching a merely convex
    preference."""
    eta = 0.3 * delta * rng.uniform(0.5, 1.0)
    box = BoxHalfspace.box([(0.0, 1.0), (-1.0, 1.0)])
    return BoxHalfspace(box.lower, box.upper, (eta, 1.0), 0.0), BoxHalfspace(box.lower, box.upper, (-eta, 1.0), 0.0)


# -- Cantor space -----------------------------------------------------------

Word = tuple  # tuple of 0/1


def _check_word(word: Sequence[int]) -> tuple:
    word = tuple(word)
    if any(b not in (0, 1) for b in word):
        raise ValidationError("binary words contain only 0 and 1")
    return word


def cantor_encode(word: Sequence[int]) -> Interval:
    """Exact range of (1/3) sum_n (2/3)^(n-1) b_n over all extensions of ``word``.

    b_n = 1 when a_n = 0 and b_n = 0 when a_n = 1. The endpoints are Fractions;
    the interval has width (2/3)^len(word).
    """
    word = _check_word(word)
    lo = Fraction(0)
    weight = Fraction(1, 3)
    for a in word:
        if a == 0:
            lo += weight
        weight *= Fraction(2, 3)
    return Interval(lo, lo + 3 * weight)


def covers_unit_interval(intervals: Sequence[Interval]) -> bool:
    """Whether the union of closed intervals is exactly [0, 1] (or contains it)."""
    reach = Fraction(0)
    for iv in sorted(intervals, key=lambda iv: iv.lo):
        if iv.lo > reach:
            return False
        reach = max(reach, iv.hi)
    return reach >= 1


def words(depth: int):
    for k in range(2 ** depth):
        yield tuple((k >> (depth - 1 - i)) & 1 for i in range(depth))


# -- bars -------------------------------------------------------------------


@dataclass(frozen=True)
class BarSpec:
    member: Callable[[tuple], bool]
    closed_under_extension: bool = False
    name: str = ""


@dataclass(frozen=True)
class UniformAt:
    depth: int

    def to_json(self) -> dict:
        return {"kind": "UniformAt", "depth": self.depth}


@dataclass(frozen=True)
class NotBarWithin:
    depth: int
    witness: tuple

    def to_json(self) -> dict:
        return {"kind": "NotBarWithin", "depth": self.depth, "witness": "".join(map(str, self.witness))}


BARS: dict[str, BarSpec] = {
    "depth3": BarSpec(lambda w: len(w) == 3, False, "depth3"),
    "contains-one": BarSpec(lambda w: 1 in w, True, "contains-one"),
    "first-bit": BarSpec(lambda w: (len(w) >= 1 and w[0] == 0) or len(w) >= 2, True, "first-bit"),
}


def find_uniform_bound(bar: BarSpec, depth_limit: int) -> UniformAt | NotBarWithin:
    """Smallest N such that every path has a prefix of length <= N in the bar.

    The frontier holds the words of the current depth with no barred
    prefix; the search stops when it empties or ``depth_limit`` is passed.
    Nothing is ever claimed about depths beyond the limit.
    """
    if depth_limit < 1:
        raise ValidationError("depth_limit must be >= 1")
    frontier = [] if bar.member(()) else [()]
    depth = 0
    while frontier and depth < depth_limit:
        depth += 1
        frontier = [w + (b,) for w in frontier for b in (0, 1) if not bar.member(w + (b,))]
    if frontier:
        return NotBarWithin(depth_limit, frontier[0])
    return UniformAt(depth)


def audit_extension_closure(bar: BarSpec, depth: int) -> int:
    """Members u up to ``depth`` with a one-bit extension outside the bar."""
    bad = 0
    for k in range(depth):
        for w in words(k):
            if bar.member(w) and not all(bar.member(w + (b,)) for b in (0, 1)):
                bad += 1
    return bad


# -- continuous predicates --------------------------------------------------


@dataclass(frozen=True)
class PredicateSpec:
    holds: Callable[[tuple, float, float], bool]
    dimension: int = 1
    name: str = ""


def _lipschitz_sq(x: tuple, eps: float, delta: float) -> bool:
    """Every z, z' in B(x, delta) n [0,1] with |z - z'| < delta has |z^2 - z'^2| < eps.

    On [a, b] the supremum of z^2 - z'^2 over such pairs is
    b^2 - max(a, b - delta)^2.
    """
    t = x[0]
    a, b = max(0.0, t - delta), min(1.0, t + delta)
    return b * b - max(a, b - delta) ** 2 < eps


def _always(x: tuple, eps: float, delta: float) -> bool:
    return delta < 1.0


def _away_from_zero(x: tuple, eps: float, delta: float) -> bool:
    return 0.0 < delta < x[0]


def _product_sq(x: tuple, eps: float, delta: float) -> bool:
    return all(_lipschitz_sq((xi,), eps / 2, delta) for xi in x)


PREDICATES: dict[str, PredicateSpec] = {
    "lipschitz-sq": PredicateSpec(_lipschitz_sq, 1, "lipschitz-sq"),
    "always": PredicateSpec(_always, 1, "always"),
    "away-from-zero": PredicateSpec(_away_from_zero, 1, "away-from-zero"),
    "product-sq": PredicateSpec(_product_sq, 2, "product-sq"),
}


def default_delta_grid(step: float = 0.002) -> list[float]:
    count = round(1.0 / step)
    return [k * step for k in range(1, count + 1)]


def _unit_grid(spacing: float) -> np.ndarray:
    return np.linspace(0.0, 1.0, max(2, round(1.0 / spacing) + 1))


def _reduce_first(pred: PredicateSpec, points: np.ndarray) -> Callable[[float, float, float], bool]:
    """P'(t, eps, delta) iff P((t, y), eps, delta) for every grid y in [0,1]^(n-1).

    The inner coordinates are swept recursively, one coordinate at a time.
    """
    n = pred.dimension

    def inner(prefix: tuple, eps: float, delta: float) -> bool:
        if len(prefix) == n:
            return pred.holds(prefix, eps, delta)
        return all(inner(prefix + (float(y),), eps, delta) for y in points)

    return lambda t, eps, delta: inner((float(t),), eps, delta)


def predicate_uniform_delta(
    pred: PredicateSpec, eps: float, grid: float, delta_grid: Optional[Sequence[float]] = None
) -> Optional[float]:
    """Largest delta in ``delta_grid`` with P(x, eps, delta) at every grid point of [0,1]^n."""
    if eps <= 0 or grid <= 0:
        raise ValidationError("eps and grid must be positive")
    points = _unit_grid(grid)
    first = _reduce_first(pred, points)
    for delta in sorted(delta_grid if delta_grid is not None else default_delta_grid(), reverse=True):
        if all(first(t, eps, delta) for t in points):
            return float(delta)
    return None


@dataclass
class ConditionAudit:
    trials: int
    premises: int
    violations: int
    examples: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"trials": self.trials, "premises": self.premises, "violations": self.violations}


def audit_condition_ii(pred: PredicateSpec, trials: int, rng: np.random.Generator) -> ConditionAudit:
    """Random (x, y, eps, delta, delta') with |x - y| < delta' < delta: whenever
    P(x, eps, delta) holds, P(y, eps, delta - delta') must hold too."""
    n = pred.dimension
    report = ConditionAudit(trials, 0, 0)
    for _ in range(trials):
        x = rng.random(n)
        eps = rng.uniform(0.01, 1.0)
        delta = rng.uniform(0.001, 0.5)
        delta_p = delta * rng.uniform(0.0, 1.0)
        direction = rng.standard_normal(n)
        direction /= np.linalg.norm(direction)
        y = np.clip(x + direction * delta_p * rng.uniform(0.0, 1.0), 0.0, 1.0)
        if not np.linalg.norm(x - y) < delta_p:
            continue
        xt, yt = tuple(map(float, x)), tuple(map(float, y))
        if pred.holds(xt, eps, delta):
            report.premises += 1
            if not pred.holds(yt, eps, delta - delta_p):
                report.violations += 1
                if len(report.examples) < 5:
                    report.examples.append((xt, yt, eps, delta, delta_p))
    return report
