"""Approximate competitive equilibria with zero-wealth consumers and a cone technology.

The production set is the finitely generated cone with free disposal,
Y = {G s - d : s >= 0, d >= 0}. A candidate (p, xi_1..xi_m, eta) is checked
for

* E1: each xi_i is consumer i's demand at prices p and wealth 0;
* E2: p.g <= 0 for every generator g and p.eta = 0 (strict profit condition),
  or the weaker AE: p.eta > -eps;
* E3: sum_i xi_i = eta.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog, nnls

from .demand import BudgetSpec, demand
from .errors import DomainError, EmptyBudget, ValidationError
from .geometry import BoxHalfspace, ConvexBody, body_from_json
from .preference import Preference, parse_utility


@dataclass(frozen=True)
class Consumer:
    body: ConvexBody
    preference: Preference
    utility: str = ""

    def to_json(self) -> dict:
        return {"body": self.body.to_json(), "utility": self.utility}


@dataclass(frozen=True)
class Economy:
    consumers: tuple
    generators: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "consumers", tuple(self.consumers))
        object.__setattr__(self, "generators", tuple(tuple(float(v) for v in g) for g in self.generators))
        if not self.consumers:
            raise ValidationError("an economy needs at least one consumer")
        n = self.dimension
        for c in self.consumers:
            if c.body.dimension != n or c.preference.dimension != n:
                raise ValidationError("consumers live in different commodity spaces")
        if any(len(g) != n for g in self.generators):
            raise ValidationError("generator dimension does not match the commodity space")

    @property
    def dimension(self) -> int:
        return self.consumers[0].body.dimension

    @property
    def generator_matrix(self) -> np.ndarray:
        """Columns are the generators g_j."""
        n = self.dimension
        return np.array(self.generators, dtype=float).reshape(-1, n).T

    def to_json(self) -> dict:
        return {"consumers": [c.to_json() for c in self.consumers], "generators": [list(g) for g in self.generators]}


def economy_from_json(obj: dict) -> Economy:
    try:
        consumers = [
            Consumer(body_from_json(c["body"]), parse_utility(c["utility"]), c["utility"]) for c in obj["consumers"]
        ]
        return Economy(consumers, obj.get("generators", []))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed economy: {exc}") from exc


def labor_economy() -> Economy:
    """Two goods, one consumer who sells labour (x_1 in [-1, 0]) for a
    consumption good (x_2 in [0, 1]); u = sqrt((1 + x_1) x_2); the technology
    turns one unit of labour into one unit of the good. The equilibrium price
    ray is p = (1, 1) with xi = eta = (-1/2, 1/2)."""
    spec = "cobb-douglas(0.5,0.5;1,0)"
    body = BoxHalfspace.box([(-1.0, 0.0), (0.0, 1.0)])
    return Economy([Consumer(body, parse_utility(spec), spec)], [(-1.0, 1.0)])


# -- the cone ---------------------------------------------------------------


def _cone_matrix(econ: Economy) -> np.ndarray:
    n = econ.dimension
    return np.hstack([econ.generator_matrix, -np.eye(n)])


def project_onto_cone(econ: Economy, v: Sequence[float]) -> tuple[np.ndarray, float]:
    """Nearest point of Y to v and the distance, via nonnegative least squares."""
    A = _cone_matrix(econ)
    coef, resid = nnls(A, np.asarray(v, dtype=float))
    return A @ coef, float(resid)


@dataclass(frozen=True)
class ConeAudit:
    ok: bool
    witness: Optional[tuple]

    def to_json(self) -> dict:
        return {"ok": self.ok, "witness": None if self.witness is None else list(self.witness)}


def audit_cone(econ: Economy) -> ConeAudit:
    """Y meets the nonnegative orthant only at 0.

    Looks for s, d >= 0 with G s - d >= 0 and sum(G s - d) = 1 as a linear
    programme; a feasible point is a nonzero nonnegative element of Y.
    """
    if not econ.generators:
        return ConeAudit(True, None)
    A = _cone_matrix(econ)
    k = A.shape[1]
    res = linprog(
        np.zeros(k),
        A_ub=-A,
        b_ub=np.zeros(econ.dimension),
        A_eq=A.sum(axis=0, keepdims=True),
        b_eq=[1.0],
        bounds=[(0, None)] * k,
        method="highs",
    )
    if res.status == 0:
        return ConeAudit(False, tuple(float(v) for v in A @ res.x))
    return ConeAudit(True, None)


# -- candidates and the checker ---------------------------------------------


@dataclass(frozen=True)
class EquilibriumCandidate:
    p: tuple
    xi: tuple
    eta: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        object.__setattr__(self, "xi", tuple(tuple(float(v) for v in x) for x in self.xi))
        object.__setattr__(self, "eta", tuple(float(v) for v in self.eta))

    def to_json(self) -> dict:
        return {"p": list(self.p), "xi": [list(x) for x in self.xi], "eta": list(self.eta)}


@dataclass
class EquilibriumReport:
    e1: bool
    e2: bool
    ae: bool
    e3: bool
    demand_errors: list
    max_profit: float
    value_of_eta: float
    balance_error: float
    cone_distance: float
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.e1 and (self.e2 or self.ae) and self.e3

    @property
    def mode(self) -> Optional[str]:
        if not self.passed:
            return None
        return "E2" if self.e2 else "AE"

    def to_json(self) -> dict:
        return {
            "E1": self.e1,
            "E2": self.e2,
            "AE": self.ae,
            "E3": self.e3,
            "pass": self.passed,
            "mode": self.mode,
            "demandErrors": self.demand_errors,
            "maxProfit": self.max_profit,
            "valueOfEta": self.value_of_eta,
            "balanceError": self.balance_error,
            "coneDistance": self.cone_distance,
            "notes": self.notes,
        }


def check_equilibrium(econ: Economy, cand: EquilibriumCandidate, eps: float, tol: float) -> EquilibriumReport:
    """E1 and E3 are judged at 5 tol; strict E2 at tol; AE at eps.

    ``coneDistance`` (how far eta is from Y) is reported but is not part of
    the verdict.
    """
    if eps <= 0 or tol <= 0:
        raise ValidationError("eps and tol must be positive")
    n = econ.dimension
    if len(cand.p) != n or len(cand.eta) != n or len(cand.xi) != len(econ.consumers):
        raise ValidationError("candidate does not match the economy's dimensions")
    notes = []
    errors = []
    for i, (consumer, x) in enumerate(zip(econ.consumers, cand.xi)):
        try:
            d = demand(consumer.preference, BudgetSpec(cand.p, 0.0, consumer.body), tol)
            errors.append(math.dist(d, x))
        except DomainError as exc:
            errors.append(math.inf)
            notes.append(f"consumer {i}: {type(exc).__name__}: {exc}")
    p = np.array(cand.p)
    eta = np.array(cand.eta)
    max_profit = max((float(p @ np.array(g)) for g in econ.generators), default=-math.inf)
    value = float(p @ eta)
    balance = float(np.linalg.norm(np.sum(cand.xi, axis=0) - eta))
    _, cone_dist = project_onto_cone(econ, eta)
    return EquilibriumReport(
        e1=all(e <= 5 * tol for e in errors),
        e2=max_profit <= tol and abs(value) <= tol,
        ae=value > -eps,
        e3=balance <= 5 * tol,
        demand_errors=errors,
        max_profit=max_profit,
        value_of_eta=value,
        balance_error=balance,
        cone_distance=cone_dist,
        notes=notes,
    )


# -- grid search ------------------------------------------------------------


def simplex_grid(dimension: int, depth: int):
    """Prices k / 2^depth on the unit simplex, in lexicographic order of k."""
    m = 2 ** depth
    for head in itertools.product(range(m + 1), repeat=dimension - 1):
        rest = m - sum(head)
        if rest >= 0:
            yield tuple(k / m for k in head + (rest,))


@dataclass
class SearchOutcome:
    candidate: Optional[EquilibriumCandidate]
    report: Optional[EquilibriumReport]
    grid_index: Optional[int]
    evaluated: int
    diagnostics: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "candidate": None if self.candidate is None else self.candidate.to_json(),
            "report": None if self.report is None else self.report.to_json(),
            "gridIndex": self.grid_index,
            "evaluated": self.evaluated,
            "diagnostics": self.diagnostics,
        }


def candidate_at(econ: Economy, p: Sequence[float], tol: float) -> EquilibriumCandidate:
    """Demands at w = 0 and the projection of their sum onto Y."""
    xi = [demand(c.preference, BudgetSpec(p, 0.0, c.body), tol) for c in econ.consumers]
    eta, _ = project_onto_cone(econ, np.sum(xi, axis=0))
    return EquilibriumCandidate(p, xi, eta)


def search_equilibrium(econ: Economy, eps: float, grid_depth: int, tol: float) -> SearchOutcome:
    """Scan the price simplex at resolution 2^-grid_depth.

    The first grid price whose candidate passes with strict E2 is returned.
    If none does, the first AE-only pass is returned instead. AE alone is
    weak: in the labour economy every price with p_1 < p_2 passes it, and
    so does the corner p = (0, 1) where nothing is traded. Prices with an
    empty budget set for some consumer are listed in ``diagnostics``.
    """
    if eps <= 0 or tol <= 0:
        raise ValidationError("eps and tol must be positive")
    if grid_depth < 1:
        raise ValidationError("grid_depth must be >= 1")
    fallback = None
    diagnostics = []
    evaluated = 0
    for index, p in enumerate(simplex_grid(econ.dimension, grid_depth)):
        evaluated += 1
        try:
            cand = candidate_at(econ, p, tol)
        except EmptyBudget as exc:
            diagnostics.append({"p": list(p), "error": "EmptyBudget", "detail": str(exc)})
            continue
        report = check_equilibrium(econ, cand, eps, tol)
        if report.passed and report.e2:
            return SearchOutcome(cand, report, index, evaluated, diagnostics)
        if report.passed and fallback is None:
            fallback = (cand, report, index)
    if fallback is None:
        return SearchOutcome(None, None, None, evaluated, diagnostics)
    return SearchOutcome(*fallback, evaluated, diagnostics)
