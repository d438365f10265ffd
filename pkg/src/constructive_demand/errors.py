"""Exception hierarchy.

Domain errors are raised when the mathematics refuses the input (an empty
budget set, an oracle that is not strictly convex). The CLI maps them to
exit status 1; everything else that is the caller's fault is a
``ValidationError`` (exit status 2).
"""


class DomainError(Exception):
    """Base class for errors that carry mathematical meaning."""


class EmptyBody(DomainError):
    """A convex body failed its inhabitation check."""


class EmptySlice(DomainError):
    """A slice was requested outside the first-coordinate projection."""


class EmptyBudget(EmptyBody):
    """The budget set {x in X : p.x <= w} is empty."""


class NotStrictlyConvex(DomainError):
    """Neither disjunct of a strict-convexity test held for the oracle."""


class ValidationError(ValueError):
    """Malformed parameters, raised before any computation starts."""
