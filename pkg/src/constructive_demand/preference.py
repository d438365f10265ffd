"""Strict-preference oracles and their rotundity data."""

from __future__ import annotations

import enum
import functools
import math
import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NotStrictlyConvex, ValidationError
from .geometry import TAU_GEOM, BallHalfspace, ConvexBody, sample_members


@dataclass(frozen=True)
class RotundityModulus:
    """eps -> delta such that midpoints of eps-separated pairs, moved by less
    than delta, still beat one endpoint. ``base`` is set for pointwise moduli."""

    delta_of_eps: Callable[[float], float]
    kind: str = "uniform"
    base: Optional[tuple] = None

    def __call__(self, eps: float) -> float:
        return self.delta_of_eps(eps)


@dataclass(frozen=True)
class StrongConcavityData:
    alpha: float
    lipschitz: float

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.lipschitz <= 0:
            raise ValidationError("alpha and lipschitz must be positive")


class Preference:
    """A decidable strict preference ``x > y`` on points of a fixed dimension."""

    def __init__(self, compare: Callable, dimension: int, rotundity: Optional[RotundityModulus] = None):
        self._compare = compare
        self.dimension = dimension
        self.rotundity = rotundity

    def compare(self, x: Sequence[float], y: Sequence[float]) -> bool:
        return bool(self._compare(x, y))

    def with_rotundity(self, rotundity: RotundityModulus) -> "Preference":
        return Preference(self._compare, self.dimension, rotundity)


class UtilityPreference(Preference):
    """``x > y`` iff ``u(x) > u(y)``.

    A utility may expose ``tiebreak(x)``; it is consulted only when the two
    utility values are exactly equal, so the relation is the lexicographic
    order on ``(u, tiebreak)`` and stays asymmetric and negatively transitive.
    """

    def __init__(
        self,
        utility: Callable,
        dimension: int,
        strictly_quasi_concave: bool = True,
        rotundity: Optional[RotundityModulus] = None,
        name: str = "",
    ):
        self.utility = utility
        self.strictly_quasi_concave = strictly_quasi_concave
        self.name = name
        self._tiebreak = getattr(utility, "tiebreak", None)
        super().__init__(None, dimension, rotundity)

    def compare(self, x, y) -> bool:
        ux, uy = self.utility(x), self.utility(y)
        if ux != uy or self._tiebreak is None:
            return ux > uy
        return self._tiebreak(x) > self._tiebreak(y)

    def with_rotundity(self, rotundity: RotundityModulus) -> "UtilityPreference":
        return UtilityPreference(self.utility, self.dimension, self.strictly_quasi_concave, rotundity, self.name)

    def __repr__(self) -> str:
        return f"UtilityPreference({self.name or self.utility!r})"


# -- bundled utilities (module-level classes so they pickle) ----------------


@dataclass(frozen=True)
class CobbDouglas:
    """prod (x_i + shift_i) ** a_i, tie-broken on the zero set by sum a_i log1p(.)."""

    exponents: tuple
    shift: tuple = ()

    def _bases(self, x):
        if self.shift:
            return [xi + si for xi, si in zip(x, self.shift)]
        return x

    def __call__(self, x) -> float:
        bases = self._bases(x)
        if min(bases) <= 0.0:
            return 0.0 if min(bases) == 0.0 else -math.inf
        return math.prod(map(pow, bases, self.exponents))

    def tiebreak(self, x) -> float:
        return math.fsum(a * math.log1p(max(b, 0.0)) for b, a in zip(self._bases(x), self.exponents))


@dataclass(frozen=True)
class NegQuadratic:
    """-sum (x_i - peak_i)^2: strongly concave with alpha = 2."""

    peak: tuple

    def __call__(self, x) -> float:
        return -math.fsum((xi - ci) ** 2 for xi, ci in zip(x, self.peak))


@dataclass(frozen=True)
class Linear:
    gradient: tuple

    def __call__(self, x) -> float:
        return math.fsum(g * xi for g, xi in zip(self.gradient, x))


@dataclass(frozen=True)
class Constant:
    value: float = 0.0

    def __call__(self, x) -> float:
        return self.value


_SPEC_RE = re.compile(r"^\s*([a-z][a-z-]*)\s*\(([^)]*)\)\s*$")


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad number list {text!r}") from exc


def parse_utility(spec: str) -> UtilityPreference:
    """Build a preference from a registry string.

    Known names: ``cobb-douglas(a1,..,an[;s1,..,sn])`` (optional shift),
    ``neg-quadratic(c1,..,cn)`` (peak at c), ``linear(g1,..,gn)``,
    ``counterexample(x)`` (the 1-D family -x*t).
    """
    m = _SPEC_RE.match(spec)
    if not m:
        raise ValidationError(f"cannot parse utility {spec!r}")
    name, args = m.groups()
    head, _, tail = args.partition(";")
    params, shift = _floats(head), _floats(tail)
    if name == "counterexample":
        from .foundations import counterexample_preference

        if len(params) != 1:
            raise ValidationError("counterexample takes one parameter")
        return counterexample_preference(params[0])
    if not params:
        raise ValidationError(f"{name} needs at least one parameter")
    if name == "cobb-douglas":
        if any(a <= 0 for a in params):
            raise ValidationError("Cobb-Douglas exponents must be positive")
        if shift and len(shift) != len(params):
            raise ValidationError("shift must match the exponent count")
        return UtilityPreference(CobbDouglas(params, shift), len(params), name=spec.strip())
    if shift:
        raise ValidationError(f"{name} takes no shift")
    if name == "neg-quadratic":
        return UtilityPreference(NegQuadratic(params), len(params), name=spec.strip())
    if name == "linear":
        return UtilityPreference(Linear(params), len(params), strictly_quasi_concave=False, name=spec.strip())
    raise ValidationError(f"unknown utility {name!r}")


# -- operations -------------------------------------------------------------


class Disjunct(enum.Enum):
    FIRST = "FirstDisjunct"
    SECOND = "SecondDisjunct"


def strict_convexity_witness(pref: Preference, x, y, t: float) -> Disjunct:
    """Which disjunct of strict convexity holds for the combination t*x + (1-t)*y."""
    if not 0.0 < t < 1.0:
        raise ValidationError("t must lie strictly between 0 and 1")
    if math.dist(x, y) <= TAU_GEOM:
        raise ValidationError("strict convexity needs two distinct points")
    z = tuple(t * a + (1.0 - t) * b for a, b in zip(x, y))
    if pref.compare(z, x):
        return Disjunct.FIRST
    if pref.compare(z, y):
        return Disjunct.SECOND
    raise NotStrictlyConvex(f"combination at t={t} beats neither endpoint")


def rotundity_delta_from_strong_concavity(data: StrongConcavityData, eps: float) -> float:
    """delta' = alpha eps^2 / (16 L).

    Strong concavity gives u(mid) >= min(u(x), u(y)) + alpha eps^2 / 8 when
    |x - y| >= eps; a shift of the midpoint by |z| < delta' costs at most
    L delta' = alpha eps^2 / 16, half the slack, so the inequality stays strict.
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    return data.alpha * eps * eps / (16.0 * data.lipschitz)


def _farthest_distance(body: ConvexBody, point: np.ndarray) -> float:
    if isinstance(body, BallHalfspace):
        return float(np.linalg.norm(np.array(body.center) - point)) + body.radius
    bounds = body.axis_bounds()
    return math.sqrt(sum(max(abs(iv.lo - c), abs(iv.hi - c)) ** 2 for iv, c in zip(bounds, point)))


def neg_quadratic_concavity(utility: NegQuadratic, region: ConvexBody) -> StrongConcavityData:
    """alpha = 2 and L = 2 max_{x in region} |x - peak| (gradient bound)."""
    peak = np.array(utility.peak, dtype=float)
    return StrongConcavityData(alpha=2.0, lipschitz=2.0 * _farthest_distance(region, peak))


def uniform_modulus(data: StrongConcavityData) -> RotundityModulus:
    return RotundityModulus(functools.partial(rotundity_delta_from_strong_concavity, data), "uniform")


def pointwise_modulus(utility: NegQuadratic, body: ConvexBody, base) -> RotundityModulus:
    """Rotundity modulus at a fixed base point.

    Midpoints (base + x)/2 only range over the body shrunk by half toward
    ``base``, so the gradient bound is taken over that smaller region.
    """
    base_arr = np.array(base, dtype=float)
    peak = np.array(utility.peak, dtype=float)
    if isinstance(body, BallHalfspace):
        centre = (base_arr + np.array(body.center)) / 2
        reach = float(np.linalg.norm(centre - peak)) + body.radius / 2
    else:
        reach = (_farthest_distance(body, peak) + float(np.linalg.norm(base_arr - peak))) / 2
    data = StrongConcavityData(2.0, 2.0 * reach)
    return RotundityModulus(functools.partial(rotundity_delta_from_strong_concavity, data), "pointwise", tuple(base))


def _rotund_at(pref: Preference, x, y, z) -> bool:
    m = tuple((a + b) / 2 + c for a, b, c in zip(x, y, z))
    return pref.compare(m, x) or pref.compare(m, y)


def draw_separated_pairs(body: ConvexBody, eps: float, trials: int, rng: np.random.Generator):
    """``trials`` (x, y, unit direction, radius fraction) tuples with |x - y| >= eps.

    Draws are sequential per trial, so the first k tuples do not depend on
    ``trials`` (a shorter run sees a prefix of a longer one).
    """
    n = body.dimension
    out = []
    for _ in range(trials):
        for _attempt in range(10_000):
            x, y = sample_members(body, rng, 2)
            if np.linalg.norm(x - y) >= eps:
                break
        else:
            raise ValidationError("no member pairs at the requested separation")
        d = rng.standard_normal(n)
        d /= np.linalg.norm(d)
        out.append((tuple(x), tuple(y), d, rng.random()))
    return out


def estimate_rotundity_modulus(
    pref: Preference,
    body: ConvexBody,
    eps: float,
    trials: int,
    rng: np.random.Generator,
    depth: int = 40,
) -> float:
    """Largest delta in {eps/2, eps/4, ...} (``depth`` halvings) passing every trial.

    Each trial is a fixed (x, y, direction, fraction) draw; the perturbation
    at level delta is ``delta * fraction * direction``. Returns 0.0 when even
    the smallest level fails.
    """
    if eps <= 0 or trials < 1:
        raise ValidationError("eps must be positive and trials >= 1")
    draws = draw_separated_pairs(body, eps, trials, rng)
    delta = eps / 2
    for _ in range(depth):
        if all(_rotund_at(pref, x, y, tuple(delta * f * d)) for x, y, d, f in draws):
            return delta
        delta /= 2
    return 0.0


def audit_rotundity(
    pref: Preference, body: ConvexBody, eps: float, delta: float, trials: int, rng: np.random.Generator
) -> int:
    """Number of random (x, y, z) with |x-y| >= eps, |z| < delta violating rotundity."""
    return sum(not _rotund_at(pref, x, y, tuple(delta * f * d)) for x, y, d, f in draw_separated_pairs(body, eps, trials, rng))
