"""Demand functions of strictly convex preferences, computed by comparison alone."""

from .demand import BudgetSpec, budget_body, demand, gamma, gamma_modulus, verify_gamma_uniform_continuity
from .errors import DomainError, EmptyBody, EmptyBudget, EmptySlice, NotStrictlyConvex, ValidationError
from .geometry import (
    BallHalfspace,
    BoxHalfspace,
    EpsNet,
    Interval,
    IntervalBody,
    eps_net,
    hausdorff,
    project_first,
    slice_first,
)
from .maximizer import MaximizeResult, check_dominance, maximize_body, maximize_interval, quarter_decision
from .preference import Preference, RotundityModulus, StrongConcavityData, UtilityPreference, parse_utility

__version__ = "0.1.0"

__all__ = [
    "BallHalfspace",
    "BoxHalfspace",
    "BudgetSpec",
    "DomainError",
    "EmptyBody",
    "EmptyBudget",
    "EmptySlice",
    "EpsNet",
    "Interval",
    "IntervalBody",
    "MaximizeResult",
    "NotStrictlyConvex",
    "Preference",
    "RotundityModulus",
    "StrongConcavityData",
    "UtilityPreference",
    "ValidationError",
    "budget_body",
    "check_dominance",
    "demand",
    "eps_net",
    "gamma",
    "gamma_modulus",
    "hausdorff",
    "maximize_body",
    "maximize_interval",
    "parse_utility",
    "project_first",
    "quarter_decision",
    "slice_first",
    "verify_gamma_uniform_continuity",
]
