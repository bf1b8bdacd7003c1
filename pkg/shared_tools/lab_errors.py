"""Exception hierarchy shared by the CycLab library modules."""

from __future__ import annotations

from typing import Any, Dict, Optional


class CycLabError(RuntimeError):
    """Base class for every error raised by the lab modules."""

    def __init__(self, message: str, *, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details: Dict[str, Any] = dict(details or {})


class ZeroConstantTerm(CycLabError):
    """Reciprocal requested for a series whose constant term is zero."""


class NotDiagonal(CycLabError):
    """Series has a nonzero coefficient off the diagonal k == l."""


class ParameterOutOfRange(CycLabError, ValueError):
    """A numeric parameter lies outside the range where the operation is defined."""


class NumericalBreakdown(CycLabError):
    """Cholesky factorisation of a Gram matrix failed."""

    def __init__(self, message: str, *, largest_completed: Optional[int] = None,
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details=details)
        self.largest_completed = largest_completed


class Inconclusive(CycLabError):
    """No decay model fits the distance sequence well enough."""


class ResolutionWarning(CycLabError):
    """Torus minima cluster near the dedup threshold; the grid is too coarse."""


class DegenerateSlice(CycLabError):
    """Leading coefficient in z1 vanishes on a sweep slice."""


class DegenerateInput(CycLabError):
    """Input polynomial lacks the structure an operation needs."""


class MatchingAmbiguity(CycLabError):
    """Two root pairings between continuation nodes cost almost the same."""


class ExpressionSyntaxError(CycLabError, ValueError):
    """Polynomial expression or JSON payload could not be parsed."""
