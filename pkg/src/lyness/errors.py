"""Exception hierarchy shared by every module of the toolkit."""

from __future__ import annotations


class LynessError(Exception):
    """Base class for toolkit errors."""


class DomainError(LynessError, ValueError):
    """An input lies outside the domain of an operation."""


class UnsupportedPeriodError(DomainError):
    """The operation is only defined for particular cycle lengths."""


class PoleError(LynessError, ArithmeticError):
    """A map factor hit its singular line (division by zero).

    ``factor`` is the 1-based index of the failing factor inside the cycle,
    ``step`` the global recurrence index when known.
    """

    def __init__(self, message, *, coordinate=None, factor=None, step=None, partial=None):
        super().__init__(message)
        self.coordinate = coordinate
        self.factor = factor
        self.step = step
        self.partial = partial


class RangeError(LynessError, OverflowError):
    """A coordinate left the representable range in standard coordinates."""

    def __init__(self, message, *, step=None, partial=None):
        super().__init__(message)
        self.step = step
        self.partial = partial


class IndeterminateRankError(LynessError):
    """Numerical rank of a system could not be decided reliably."""

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class DegenerateInvariantError(DomainError):
    pass


class EmptyLevelError(DomainError):
    pass


class GeometryError(LynessError):
    pass


class ConvergenceError(LynessError):
    pass


class DeterminantLawError(LynessError):
    """An interior equilibrium violated det = 1 beyond tolerance."""
