"""Exception hierarchy shared by the solvers and the CLI."""

from __future__ import annotations


class HitchinError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedDegreeError(HitchinError, ValueError):
    pass


class InvalidSheetError(HitchinError, ValueError):
    pass


class SingularBoundaryError(HitchinError, ValueError):
    pass


class DomainError(HitchinError, ValueError):
    """Grid too small for the zeros of det(Phi), or grids that do not match."""


class PreconditionError(HitchinError, ValueError):
    pass


class ConicalSingularityError(HitchinError, ValueError):
    pass


class ConvergenceError(HitchinError, RuntimeError):
    """Iterative solver failed; carries the residual history for diagnosis."""

    def __init__(self, message: str, residual: float = float("nan"), history=None, context=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history or [])
        self.context = context


class ProjectionError(ConvergenceError):
    pass
