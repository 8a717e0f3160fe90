from __future__ import annotations


class WitsenhausenError(Exception):
    """Base class for errors raised by this package."""


class DomainError(WitsenhausenError, ValueError):
    """A parameter is outside the domain of the operation."""


class NonConvergenceError(WitsenhausenError):
    """A quadrature did not reach its tolerance."""


class NoUpperBoundError(WitsenhausenError):
    """No feasible power was found before the search cap."""


class MonotonicityError(WitsenhausenError):
    """A monotonicity property relied on by a search was violated."""


class DegenerateInputError(WitsenhausenError):
    """Not enough points to build an envelope."""


class CurveParseError(WitsenhausenError):
    """A curve file could not be parsed."""

    def __init__(self, path: str, line: int, reason: str) -> None:
        """Initialize the error."""
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


class EmptyCurveFileError(WitsenhausenError):
    """A curve file has no data rows."""


class SweepTimeoutError(WitsenhausenError):
    """A sweep did not finish within its safety timeout."""
