"""Comparison-only argmax: quarter-point bracketing and dimension induction.

The one-dimensional search keeps a bracket [lo, lo + width] and at each
step discards one outer quarter, decided by two strict-preference chains
through the quarter points. In n dimensions the first coordinate is searched
with the induced relation ``s >' t iff argmax(slice s) > argmax(slice t)``,
the slice maxima being computed recursively.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NotStrictlyConvex, ValidationError
from .geometry import ConvexBody, Interval, project_first, sample_members, slice_first
from .preference import Preference

Compare1D = Callable[[float, float], bool]

_SHRINK = 0.75
_REFINE = 16.0
_MAX_REFINEMENTS = 3


class Decision(enum.Enum):
    KEEP_RIGHT = "KeepRight"  # discard [lo, q1)
    KEEP_LEFT = "KeepLeft"  # discard (q3, hi]


@dataclass(frozen=True)
class MaximizeResult:
    xi: tuple
    bracket_width: float
    comparisons: int
    dominance_checked: bool = False
    trace: Optional[tuple] = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {"xi": list(self.xi), "bracketWidth": self.bracket_width, "comparisons": self.comparisons}


def _decide(cmp: Compare1D, lo: float, width: float) -> Decision:
    q1 = lo + width / 4
    mid = lo + width / 2
    if cmp(mid, q1) and cmp(q1, lo):
        return Decision.KEEP_RIGHT
    q3 = lo + width * _SHRINK
    if cmp(mid, q3) and cmp(q3, lo + width):
        return Decision.KEEP_LEFT
    raise NotStrictlyConvex(f"neither quarter chain holds on [{lo}, {lo + width}]")


def quarter_decision(cmp: Compare1D, iv: Interval) -> Decision:
    """Which outer quarter of ``iv`` may be discarded; ties go to KEEP_RIGHT."""
    if not iv.hi > iv.lo:
        raise ValidationError("quarter decision needs an interval of positive width")
    return _decide(cmp, iv.lo, iv.hi - iv.lo)


def _best_of_three(cmp: Compare1D, lo: float, hi: float) -> tuple[float, int]:
    """Preferred point among lo, the midpoint and hi (ties keep the midpoint)."""
    mid = (lo + hi) / 2
    if cmp(hi, mid):
        return (hi, 1) if not cmp(lo, hi) else (lo, 2)
    return (lo, 2) if cmp(lo, mid) else (mid, 2)


def _bracket(
    cmp: Compare1D,
    iv: Interval,
    tol: float,
    record: bool = False,
    polish: bool = False,
    settled: Optional[Callable[[float, float], bool]] = None,
    refine: Optional[Callable[[], bool]] = None,
):
    """Shrink iv to width <= tol. Returns (xi, width, comparisons, trace).

    With ``polish`` an interval that is already narrower than tol (but not
    a point) returns its preferred point among the two ends and the middle
    instead of the bare midpoint. ``settled(lo, width)``, when given, must
    also hold before the loop stops; shrinking ends regardless once the
    quarter points can no longer be told apart in floating point. When
    neither chain holds, ``refine()`` may sharpen the oracle and ask for the
    step to be retried by returning True.
    """
    lo, width = float(iv.lo), float(iv.hi) - float(iv.lo)
    trace = [(lo, width)] if record else None
    if width <= tol:
        if polish and width > 0:
            xi, calls = _best_of_three(cmp, lo, float(iv.hi))
            return xi, width, calls, trace
        return (iv.lo + iv.hi) / 2, width, 0, trace
    steps = math.ceil(math.log(width / tol) / math.log(4 / 3))
    kept_lo = kept_hi = True
    calls = k = 0
    while k < steps or width > tol or (settled is not None and not settled(lo, width)):
        if lo + width / 4 == lo:
            break
        # inlined quarter decision (hot loop)
        q1 = lo + width / 4
        mid = lo + width / 2
        calls += 1
        if cmp(mid, q1):
            calls += 1
            right = cmp(q1, lo)
        else:
            right = False
        if right:
            lo = q1
            kept_lo = False
        else:
            q3 = lo + width * _SHRINK
            calls += 1
            left = cmp(mid, q3)
            if left:
                calls += 1
                left = cmp(q3, lo + width)
            if not left:
                if refine is not None and refine():
                    continue
                raise NotStrictlyConvex(f"neither quarter chain holds on [{lo}, {lo + width}]")
            kept_hi = False
        width *= _SHRINK
        k += 1
        if record:
            trace.append((lo, width))
    xi = lo + width / 2
    # An untouched original endpoint is returned exactly when the oracle prefers it.
    if kept_hi:
        calls += 1
        if cmp(iv.hi, xi):
            xi = iv.hi
    elif kept_lo:
        calls += 1
        if cmp(iv.lo, xi):
            xi = iv.lo
    return xi, width, calls, trace


def maximize_interval(cmp: Compare1D, iv: Interval, tol: float, record: bool = False) -> MaximizeResult:
    """Maximize a strictly convex 1-D comparison oracle to within ``tol``.

    Runs ceil(log(width/tol) / log(4/3)) quarter decisions; each multiplies
    the bracket width by exactly 3/4 in floating point. Intervals already
    narrower than ``tol`` return their midpoint without comparing anything.
    Pass ``record=True`` to keep the (lo, width) history in ``trace``.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    xi, width, calls, trace = _bracket(cmp, iv, tol, record)
    return MaximizeResult((float(xi),), width, calls, trace=tuple(trace) if record else None)


def _argmax(cmp, prefix: tuple, body: ConvexBody, tol: float, calls: list) -> tuple[tuple, float]:
    """Coordinates of the maximizer of ``body`` (prefix fixed), plus the final bracket width."""
    if body.dimension == 1:
        xi, width, n, _ = _bracket(lambda s, t: cmp(prefix + (s,), prefix + (t,)), project_first(body), tol, polish=True)
        calls[0] += n
        return (xi,), width
    inner = tol / (2 * math.sqrt(body.dimension))
    # slice tolerance; tightened when slice errors swamp the induced comparison
    slice_tol = [inner]
    memo: dict[float, tuple] = {}

    def best(s: float) -> tuple:
        hit = memo.get(s)
        if hit is None or hit[1] > slice_tol[0]:
            rest, _ = _argmax(cmp, prefix + (s,), slice_first(body, s), slice_tol[0], calls)
            hit = memo[s] = (prefix + (s,) + rest, slice_tol[0])
        return hit[0]

    def refine() -> bool:
        if slice_tol[0] <= inner / _REFINE ** _MAX_REFINEMENTS:
            return False
        slice_tol[0] /= _REFINE
        return True

    def settled(lo: float, width: float) -> bool:
        # steep slices can move the rest of the point much faster than s
        return math.dist(best(lo), best(lo + width)) <= tol / 2

    s_star, width, n, _ = _bracket(
        lambda s, t: cmp(best(s), best(t)), project_first(body), inner, settled=settled, refine=refine
    )
    calls[0] += n
    return best(s_star)[len(prefix):], width


def maximize_body(pref: Preference, body: ConvexBody, tol: float) -> MaximizeResult:
    """Unique preference-maximal point of a compact convex body, to within ``tol``.

    Dimension one delegates to ``maximize_interval``. Otherwise the first
    coordinate is searched with the induced relation on the projection and
    every coordinate level works at tolerance tol / (2 sqrt(n)). Because the
    slice maximum can move much faster than the slice coordinate (steep
    cuts, corners of a cut ball), the first-coordinate bracket keeps
    shrinking until the slice maxima at its two ends are within tol / 2.
    Slice maxima are memoized on the exact slice coordinate. Near a flat
    interior peak the slice solver's own error can swamp the induced
    comparison; when neither quarter chain holds, the slice maxima are
    recomputed at 16x tighter tolerance (at most three times) before
    NotStrictlyConvex is raised.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    if pref.dimension != body.dimension:
        raise ValidationError(f"preference has dimension {pref.dimension}, body has {body.dimension}")
    calls = [0]
    xi, width = _argmax(pref.compare, (), body, tol, calls)
    return MaximizeResult(tuple(float(v) for v in xi), width, calls[0])


@dataclass(frozen=True)
class DominanceReport:
    samples: int
    passes: int
    failures: int
    worst: Optional[tuple]

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "passes": self.passes,
            "failures": self.failures,
            "worst": None if self.worst is None else list(self.worst),
        }


def check_dominance(
    pref: Preference, body: ConvexBody, xi, samples: int, eps: float, rng: np.random.Generator
) -> DominanceReport:
    """Sample members at distance >= eps from ``xi`` and test ``xi > x`` for each.

    The worst violator is the most preferred of the failing samples. When
    eps exceeds the body's diameter bound nothing can be drawn and the
    report is vacuous.
    """
    if samples < 1 or eps <= 0:
        raise ValidationError("samples must be >= 1 and eps positive")
    if eps > body.diameter_bound():
        return DominanceReport(0, 0, 0, None)
    centre = np.asarray(xi, dtype=float)
    drawn: list[np.ndarray] = []
    have = 0
    for _ in range(200):
        if have >= samples:
            break
        batch = sample_members(body, rng, 2 * samples)
        batch = batch[np.linalg.norm(batch - centre, axis=1) >= eps]
        drawn.append(batch)
        have += len(batch)
    pts = np.vstack(drawn)[:samples] if drawn else np.empty((0, body.dimension))
    xi_t = tuple(float(v) for v in xi)
    worst = None
    failures = 0
    for row in pts:
        x = tuple(float(v) for v in row)
        if not pref.compare(xi_t, x):
            failures += 1
            if worst is None or pref.compare(x, worst):
                worst = x
    return DominanceReport(len(pts), len(pts) - failures, failures, worst)
