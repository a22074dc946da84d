"""Exception types raised across the package."""

from __future__ import annotations


class FractionalDomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class OrderError(FractionalDomainError):
    """Fractional order outside the range an operator supports."""


class ParameterError(ValueError):
    """Inconsistent inequality or solver parameters."""


class NotSPDError(ValueError):
    """Matrix is not symmetric positive definite."""


class HistoryError(IndexError):
    """A signal does not hold the samples an evaluation needs."""


class SolverError(RuntimeError):
    """Implicit step failed.

    Carries the failing grid index, the last iterate and its residual so
    callers can report partial results.
    """

    def __init__(self, message, k=None, iterate=None, residual=None):
        super().__init__(message)
        self.k = k
        self.iterate = iterate
        self.residual = residual


class ConvergenceError(SolverError):
    """Iteration budget exhausted before the update fell below tolerance."""


class DivergenceError(SolverError):
    """An iterate became non-finite."""
