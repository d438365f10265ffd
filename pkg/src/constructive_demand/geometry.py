"""Compact convex bodies with exact first-coordinate projections and slices.

Three shapes cover every set the maximizer has to search:

* ``IntervalBody``   -- a closed interval of the line;
* ``BoxHalfspace``   -- an axis-aligned box cut by one half-space ``p.x <= w``;
* ``BallHalfspace``  -- a Euclidean ball cut by one half-space.

A zero normal ``p`` means "no cut". All bodies are immutable and are checked
for inhabitation on construction.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Any, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyBody, EmptySlice, ValidationError

TAU_GEOM = 1e-9

Point = tuple  # tuple[float, ...]


def _tup(values: Sequence[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


def _dot(a: Sequence[float], b: Sequence[float]) -> float:
    return math.fsum(x * y for x, y in zip(a, b))


def _norm(a: Sequence[float]) -> float:
    return math.sqrt(math.fsum(x * x for x in a))


def _slack(*values: float) -> float:
    return TAU_GEOM * max(1.0, *(abs(v) for v in values))


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``; endpoints may be floats or Fractions."""

    lo: Any
    hi: Any

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2

    def contains(self, t, tol: float = 0.0) -> bool:
        return self.lo - tol <= t <= self.hi + tol

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


class ConvexBody:
    """Common surface of the three shapes. Subclasses are frozen dataclasses."""

    dimension: int

    def projection(self) -> Interval:
        raise NotImplementedError

    def slice_at(self, t: float) -> "ConvexBody":
        raise NotImplementedError

    def contains(self, x: Sequence[float]) -> bool:
        return bool(self.contains_many(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def nearest(self, pts: np.ndarray) -> np.ndarray:
        """Euclidean projection of each row of ``pts`` onto the body."""
        raise NotImplementedError

    def distance(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.linalg.norm(pts - self.nearest(pts), axis=1)

    def permuted(self, order: Sequence[int]) -> "ConvexBody":
        """The same body with coordinates reordered as ``x[order]``."""
        raise NotImplementedError

    def axis_bounds(self) -> list[Interval]:
        """Exact projection of the body onto every coordinate axis."""
        n = self.dimension
        out = []
        for k in range(n):
            order = [k] + [i for i in range(n) if i != k]
            out.append(self.permuted(order).projection())
        return out

    def diameter_bound(self) -> float:
        """Diagonal of the bounding box; an upper bound on the diameter."""
        return math.sqrt(sum(iv.width ** 2 for iv in self.axis_bounds()))

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class IntervalBody(ConvexBody):
    lo: float
    hi: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise EmptyBody(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def dimension(self) -> int:
        return 1

    def projection(self) -> Interval:
        return Interval(self.lo, self.hi)

    def slice_at(self, t: float) -> ConvexBody:
        raise ValueError("cannot slice a one-dimensional body")

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        x = np.asarray(pts, dtype=float)[:, 0]
        tau = _slack(self.lo, self.hi)
        return (x >= self.lo - tau) & (x <= self.hi + tau)

    def nearest(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.clip(pts, self.lo, self.hi)

    def permuted(self, order: Sequence[int]) -> ConvexBody:
        return self

    def to_json(self) -> dict:
        return {"shape": "interval", "bounds": [self.lo, self.hi]}


@dataclass(frozen=True)
class BoxHalfspace(ConvexBody):
    """``{x : lower <= x <= upper, p.x <= w}``."""

    lower: tuple
    upper: tuple
    p: tuple
    w: float = 0.0

    def __post_init__(self) -> None:
        lower, upper, p = _tup(self.lower), _tup(self.upper), _tup(self.p)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "w", float(self.w))
        if not (len(lower) == len(upper) == len(p) >= 1):
            raise ValidationError("box bounds and normal must share one dimension >= 1")
        if not all(map(math.isfinite, lower + upper + p + (self.w,))):
            raise ValidationError("box data must be finite")
        if any(l > u for l, u in zip(lower, upper)):
            raise EmptyBody("box has an empty side")
        if self.min_value() > self.w + _slack(self.w):
            raise EmptyBody(f"half-space p.x <= {self.w} misses the box")

    @classmethod
    def box(cls, bounds: Sequence[Sequence[float]]) -> "BoxHalfspace":
        bounds = [tuple(b) for b in bounds]
        return cls(tuple(b[0] for b in bounds), tuple(b[1] for b in bounds), (0.0,) * len(bounds), 0.0)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def is_cut(self) -> bool:
        return any(self.p)

    def min_value(self, start: int = 0) -> float:
        """Minimum of p.x over the box, restricted to coordinates ``start:``."""
        return math.fsum(
            min(pi * li, pi * ui)
            for pi, li, ui in zip(self.p[start:], self.lower[start:], self.upper[start:])
        )

    def max_value(self) -> float:
        return math.fsum(max(pi * li, pi * ui) for pi, li, ui in zip(self.p, self.lower, self.upper))

    def projection(self) -> Interval:
        l1, u1, p1 = self.lower[0], self.upper[0], self.p[0]
        if p1 == 0.0:
            return Interval(l1, u1)
        bound = (self.w - self.min_value(1)) / p1
        if p1 > 0:
            return Interval(l1, max(l1, min(u1, bound)))
        return Interval(min(u1, max(l1, bound)), u1)

    def slice_at(self, t: float) -> ConvexBody:
        if self.dimension < 2:
            raise ValueError("cannot slice a one-dimensional body")
        t = _clamp_into(self.projection(), t)
        w = self.w - self.p[0] * t
        floor = self.min_value(1)
        rest = BoxHalfspace(self.lower[1:], self.upper[1:], self.p[1:], max(w, floor))
        return _as_interval(rest) if rest.dimension == 1 else rest

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        lo, hi, p = np.array(self.lower), np.array(self.upper), np.array(self.p)
        tau = _slack(*self.lower, *self.upper)
        inside = np.all((pts >= lo - tau) & (pts <= hi + tau), axis=1)
        return inside & (pts @ p <= self.w + _slack(self.w))

    def nearest(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        lo, hi, p = np.array(self.lower), np.array(self.upper), np.array(self.p)
        y = np.clip(pts, lo, hi)
        if not self.is_cut:
            return y
        bad = y @ p > self.w
        if not bad.any():
            return y
        g = pts[bad]

        def excess(lam):
            return np.clip(g - lam[:, None] * p, lo, hi) @ p - self.w

        # KKT: the projection is clip(g - lam p) for the lam >= 0 that makes the cut tight.
        lam_lo = np.zeros(len(g))
        lam_hi = np.ones(len(g))
        for _ in range(200):
            over = excess(lam_hi) > 0
            if not over.any():
                break
            lam_lo[over] = lam_hi[over]
            lam_hi[over] *= 2.0
        for _ in range(80):
            mid = 0.5 * (lam_lo + lam_hi)
            over = excess(mid) > 0
            lam_lo = np.where(over, mid, lam_lo)
            lam_hi = np.where(over, lam_hi, mid)
        y[bad] = np.clip(g - lam_hi[:, None] * p, lo, hi)
        return y

    def permuted(self, order: Sequence[int]) -> "BoxHalfspace":
        return BoxHalfspace(
            tuple(self.lower[i] for i in order),
            tuple(self.upper[i] for i in order),
            tuple(self.p[i] for i in order),
            self.w,
        )

    def to_json(self) -> dict:
        return {
            "shape": "box",
            "bounds": [[l, u] for l, u in zip(self.lower, self.upper)],
            "p": list(self.p),
            "w": self.w,
        }


@dataclass(frozen=True)
class BallHalfspace(ConvexBody):
    """``{x : |x - center| <= radius, p.x <= w}``."""

    center: tuple
    radius: float
    p: tuple
    w: float = 0.0

    def __post_init__(self) -> None:
        center, p = _tup(self.center), _tup(self.p)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "w", float(self.w))
        if not (len(center) == len(p) >= 1):
            raise ValidationError("ball center and normal must share one dimension >= 1")
        if not all(map(math.isfinite, center + p + (self.radius, self.w))):
            raise ValidationError("ball data must be finite")
        if self.radius < 0:
            raise ValidationError("ball radius must be nonnegative")
        if self.min_value() > self.w + _slack(self.w):
            raise EmptyBody(f"half-space p.x <= {self.w} misses the ball")

    @classmethod
    def ball(cls, center: Sequence[float], radius: float) -> "BallHalfspace":
        return cls(tuple(center), radius, (0.0,) * len(center), 0.0)

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def is_cut(self) -> bool:
        return any(self.p)

    def min_value(self) -> float:
        return _dot(self.p, self.center) - _norm(self.p) * self.radius

    def max_value(self) -> float:
        return _dot(self.p, self.center) + _norm(self.p) * self.radius

    def _rim(self) -> tuple[np.ndarray, float]:
        """Center and radius of the ball's cross-section by the hyperplane p.x = w."""
        p, c = np.array(self.p), np.array(self.center)
        pn2 = float(p @ p)
        gap = (float(p @ c) - self.w) / pn2
        center = c - gap * p
        dist = gap * math.sqrt(pn2)
        return center, math.sqrt(max(self.radius ** 2 - dist ** 2, 0.0))

    def projection(self) -> Interval:
        c1, r, p1 = self.center[0], self.radius, self.p[0]
        pn = _norm(self.p)
        if pn == 0.0:
            return Interval(c1 - r, c1 + r)
        pc = _dot(self.p, self.center)
        rim_c, rim_r = self._rim()
        reach = rim_r * math.sqrt(max(1.0 - (p1 / pn) ** 2, 0.0))
        hi = c1 + r if pc + p1 * r <= self.w else float(rim_c[0]) + reach
        lo = c1 - r if pc - p1 * r <= self.w else float(rim_c[0]) - reach
        lo, hi = max(lo, c1 - r), min(hi, c1 + r)
        return Interval(min(lo, hi), max(lo, hi))

    def slice_at(self, t: float) -> ConvexBody:
        if self.dimension < 2:
            raise ValueError("cannot slice a one-dimensional body")
        t = _clamp_into(self.projection(), t)
        rho = math.sqrt(max(self.radius ** 2 - (t - self.center[0]) ** 2, 0.0))
        center, p = self.center[1:], self.p[1:]
        w = self.w - self.p[0] * t
        floor = _dot(p, center) - _norm(p) * rho
        rest = BallHalfspace(center, rho, p, max(w, floor))
        return _as_interval(rest) if rest.dimension == 1 else rest

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        c, p = np.array(self.center), np.array(self.p)
        inside = np.linalg.norm(pts - c, axis=1) <= self.radius + _slack(self.radius, *self.center)
        return inside & (pts @ p <= self.w + _slack(self.w))

    def nearest(self, pts: np.ndarray) -> np.ndarray:
        q = np.atleast_2d(np.asarray(pts, dtype=float))
        c, p = np.array(self.center), np.array(self.p)
        r = self.radius
        off = q - c
        dist = np.linalg.norm(off, axis=1)
        scale = np.where(dist > r, r / np.where(dist > 0, dist, 1.0), 1.0)
        to_ball = c + off * scale[:, None]
        if not self.is_cut:
            return to_ball
        pn2 = float(p @ p)
        viol = np.maximum(q @ p - self.w, 0.0)
        to_half = q - (viol / pn2)[:, None] * p
        half_ok = np.linalg.norm(to_half - c, axis=1) <= r * (1 + 1e-12) + 1e-15
        ball_ok = to_ball @ p <= self.w + _slack(self.w)
        out = np.where(half_ok[:, None], to_half, to_ball)
        both = ~half_ok & ~ball_ok
        if both.any():
            rim_c, rim_r = self._rim()
            flat = q[both] - ((q[both] @ p - self.w) / pn2)[:, None] * p
            off = flat - rim_c
            d = np.linalg.norm(off, axis=1)
            s = np.where(d > rim_r, rim_r / np.where(d > 0, d, 1.0), 1.0)
            out[both] = rim_c + off * s[:, None]
        return out

    def permuted(self, order: Sequence[int]) -> "BallHalfspace":
        return BallHalfspace(
            tuple(self.center[i] for i in order), self.radius, tuple(self.p[i] for i in order), self.w
        )

    def to_json(self) -> dict:
        return {"shape": "ball", "center": list(self.center), "radius": self.radius, "p": list(self.p), "w": self.w}


Body = Union[IntervalBody, BoxHalfspace, BallHalfspace]


def _clamp_into(iv: Interval, t: float) -> float:
    if not iv.contains(t, _slack(iv.lo, iv.hi)):
        raise EmptySlice(f"slice coordinate {t!r} outside projection [{iv.lo}, {iv.hi}]")
    return min(max(t, iv.lo), iv.hi)


def _as_interval(body: ConvexBody) -> IntervalBody:
    iv = body.projection()
    return IntervalBody(iv.lo, iv.hi)


# -- public operations ------------------------------------------------------


def project_first(body: ConvexBody) -> Interval:
    """Exact image of the body under the first-coordinate projection."""
    return body.projection()


def slice_first(body: ConvexBody, t: float) -> ConvexBody:
    """The (dimension-1) body ``{(x2..xn) : (t, x2..xn) in body}``.

    Raises EmptySlice when ``t`` lies outside the projection by more than
    ``TAU_GEOM``; inside that band ``t`` is clamped onto the projection.
    One-dimensional slices are returned as ``IntervalBody``.
    """
    return body.slice_at(t)


@dataclass(frozen=True)
class EpsNet:
    """Finite set of members within ``eps`` of every member of its source body."""

    points: np.ndarray
    eps: float

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        if self.eps <= 0:
            raise ValidationError("eps must be positive")

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(self.dimension)])
        writer.writerows([repr(float(v)) for v in row] for row in self.points)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, eps: float) -> "EpsNet":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] and rows[0][0].startswith("x"):
            rows = rows[1:]
        return cls(np.array([[float(v) for v in r] for r in rows if r]), eps)


def _axis_grid(iv: Interval, step: float) -> np.ndarray:
    if iv.width == 0:
        return np.array([iv.lo])
    count = max(2, math.ceil(iv.width / step) + 1)
    return np.linspace(iv.lo, iv.hi, count)


def eps_net(body: ConvexBody, eps: float) -> EpsNet:
    """Axis grid of spacing eps/sqrt(n), members kept, near misses projected in.

    Every body point is within eps/2 of a grid point; if that grid point is
    outside, its projection onto the body is no farther (projection onto a
    convex set is nonexpansive toward members).
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    n = body.dimension
    bounds = body.axis_bounds()
    if eps > math.sqrt(sum(iv.width ** 2 for iv in bounds)):
        centre = np.array([[iv.midpoint for iv in bounds]])
        return EpsNet(body.nearest(centre), eps)
    step = eps / math.sqrt(n)
    axes = [_axis_grid(iv, step) for iv in bounds]
    grid = np.array(list(itertools.product(*axes)), dtype=float)
    member = body.contains_many(grid)
    outside = grid[~member]
    near = outside[body.distance(outside) <= eps / 2] if len(outside) else outside
    pts = np.vstack([grid[member], body.nearest(near)]) if len(near) else grid[member]
    return EpsNet(np.unique(pts, axis=0), eps)


def _directed(a: np.ndarray, b: np.ndarray) -> float:
    dist, _ = cKDTree(b).query(a)
    return float(np.max(dist))


def hausdorff(a: EpsNet | np.ndarray, b: EpsNet | np.ndarray) -> float:
    """Hausdorff distance between two finite point sets."""
    pa = a.points if isinstance(a, EpsNet) else np.atleast_2d(np.asarray(a, dtype=float))
    pb = b.points if isinstance(b, EpsNet) else np.atleast_2d(np.asarray(b, dtype=float))
    if pa.shape[1] != pb.shape[1]:
        raise ValidationError("nets live in different dimensions")
    return max(_directed(pa, pb), _directed(pb, pa))


# -- boundary sampling for body-to-body distances ----------------------------


def _sample_segment(a: np.ndarray, b: np.ndarray, step: float) -> np.ndarray:
    count = max(2, math.ceil(np.linalg.norm(b - a) / step) + 1)
    s = np.linspace(0.0, 1.0, count)[:, None]
    return a + s * (b - a)


def _clip_polygon(verts: list[np.ndarray], p: np.ndarray, w: float) -> list[np.ndarray]:
    out = []
    for i, cur in enumerate(verts):
        nxt = verts[(i + 1) % len(verts)]
        fc, fn = cur @ p - w, nxt @ p - w
        if fc <= 0:
            out.append(cur)
        if (fc < 0 < fn) or (fn < 0 < fc):
            out.append(cur + (fc / (fc - fn)) * (nxt - cur))
    return out


def boundary_net(body: ConvexBody, eps: float) -> np.ndarray:
    """Points on the boundary with every boundary point within eps/2 of one.

    For dimension 1 these are the two endpoints; for dimension 2 the
    boundary curve is sampled at arc spacing eps. Higher dimensions fall
    back to a full eps-net, which is a superset of what is needed.
    """
    n = body.dimension
    if n == 1:
        iv = body.projection()
        return np.array([[iv.lo], [iv.hi]])
    if n > 2:
        return eps_net(body, eps).points
    if isinstance(body, BoxHalfspace):
        (l1, l2), (u1, u2) = body.lower, body.upper
        verts = [np.array(v, dtype=float) for v in ((l1, l2), (u1, l2), (u1, u2), (l1, u2))]
        if body.is_cut:
            verts = _clip_polygon(verts, np.array(body.p), body.w) or [body.nearest(verts[0])[0]]
        if len(verts) == 1:
            return np.array(verts)
        return np.vstack(
            [_sample_segment(verts[i], verts[(i + 1) % len(verts)], eps) for i in range(len(verts))]
        )
    if isinstance(body, BallHalfspace):
        c, r = np.array(body.center), body.radius
        if r == 0:
            return c[None, :]
        pn = _norm(body.p)
        if pn == 0 or body.max_value() <= body.w:
            theta = np.linspace(0, 2 * np.pi, max(8, math.ceil(2 * np.pi * r / eps) + 1))
            return c + r * np.column_stack([np.cos(theta), np.sin(theta)])
        phi = math.atan2(body.p[1], body.p[0])
        d = (body.w - _dot(body.p, body.center)) / pn
        alpha = math.acos(max(-1.0, min(1.0, d / r)))
        span = 2 * np.pi - 2 * alpha
        theta = phi + alpha + np.linspace(0, span, max(2, math.ceil(span * r / eps) + 1))
        arc = c + r * np.column_stack([np.cos(theta), np.sin(theta)])
        return np.vstack([arc, _sample_segment(arc[-1], arc[0], eps)])
    raise TypeError(f"unsupported body {type(body).__name__}")


def hausdorff_bound(a: ConvexBody, b: ConvexBody, eps: float) -> tuple[float, float]:
    """(estimate, upper bound) for the Hausdorff distance of two convex bodies.

    For convex bodies the directed distance sup_{x in A} d(x, B) is attained
    at an extreme point of A, so it suffices to evaluate the exact distance
    d(., B) (via projection) on a boundary sample. The estimate is a lower
    bound; adding the sample's covering radius eps/2 gives an upper bound.
    """
    if a.dimension != b.dimension:
        raise ValidationError("bodies live in different dimensions")
    est = max(_directed_to_body(boundary_net(a, eps), b), _directed_to_body(boundary_net(b, eps), a))
    return est, est + eps / 2


def _directed_to_body(pts: np.ndarray, body: ConvexBody) -> float:
    outside = pts[~body.contains_many(pts)]
    return float(np.max(body.distance(outside))) if len(outside) else 0.0


def sample_members(body: ConvexBody, rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` members of the body, uniform where rejection sampling allows."""
    n = body.dimension
    bounds = body.axis_bounds()
    lo = np.array([iv.lo for iv in bounds])
    hi = np.array([iv.hi for iv in bounds])
    found: list[np.ndarray] = []
    have = 0
    for _ in range(50):
        if have >= count:
            break
        batch = max(64, 4 * (count - have))
        if isinstance(body, BallHalfspace):
            g = rng.standard_normal((batch, n))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            rad = body.radius * rng.random(batch) ** (1.0 / n)
            cand = np.array(body.center) + g * rad[:, None]
        else:
            cand = lo + (hi - lo) * rng.random((batch, n))
        keep = cand[body.contains_many(cand)]
        found.append(keep)
        have += len(keep)
    pts = np.vstack(found) if found else np.empty((0, n))
    if len(pts) < count:
        # thin bodies: fall back to projected box samples
        extra = body.nearest(lo + (hi - lo) * rng.random((count - len(pts), n)))
        pts = np.vstack([pts, extra])
    return pts[:count]


# -- JSON -------------------------------------------------------------------


def body_from_json(obj: dict) -> ConvexBody:
    """Inverse of ``ConvexBody.to_json``; ``p``/``w`` default to "no cut"."""
    try:
        shape = obj["shape"]
        if shape == "interval":
            lo, hi = obj["bounds"]
            return IntervalBody(lo, hi)
        if shape == "box":
            bounds = obj["bounds"]
            n = len(bounds)
            return BoxHalfspace(
                tuple(b[0] for b in bounds),
                tuple(b[1] for b in bounds),
                tuple(obj.get("p", [0.0] * n)),
                obj.get("w", 0.0),
            )
        if shape == "ball":
            n = len(obj["center"])
            return BallHalfspace(tuple(obj["center"]), obj["radius"], tuple(obj.get("p", [0.0] * n)), obj.get("w", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed body description: {exc}") from exc
    raise ValidationError(f"unknown body shape {obj.get('shape')!r}")
