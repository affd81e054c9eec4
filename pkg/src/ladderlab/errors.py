"""Exception types shared across the package."""


class LadderLabError(Exception):
    """Base class for all package-specific failures."""


class DomainError(LadderLabError, ValueError):
    """Argument outside the supported domain (negative ordinate, iterate
    underflow, ordinate below the inversion floor, ...)."""


class AdmissibilityError(LadderLabError, ValueError):
    """Window length U outside the admissible range for the requested check."""


class QuadratureError(LadderLabError, RuntimeError):
    """Adaptive quadrature did not converge.  Carries the best estimate."""

    def __init__(self, message, best_estimate=None, err_est=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.err_est = err_est


class TruncationError(LadderLabError, ValueError):
    """Requested truncation point too short for the target accuracy."""


class TableError(LadderLabError, RuntimeError):
    """Ladder table build failed validation or is used outside its domain."""


class RootBracketError(LadderLabError, RuntimeError):
    """A root expected by continuity could not be bracketed."""
