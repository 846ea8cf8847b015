"""Exception hierarchy shared across the package."""

from __future__ import annotations


class BoundedRegError(Exception):
    """Base class for all package-specific errors."""


class PanelFormatError(BoundedRegError):
    """Raised when a panel CSV is malformed or violates panel invariants."""


class ValidationError(BoundedRegError):
    """Raised when domain values violate a documented precondition."""


class SingularMatrixError(BoundedRegError):
    """Raised when a normal matrix is singular or too ill-conditioned to invert.

    Carries a reciprocal-condition estimate in ``rcond``.
    """

    def __init__(self, message: str, rcond: float | None = None):
        if rcond is not None:
            message = f"{message} (rcond estimate {rcond:.3e})"
        super().__init__(message)
        self.rcond = rcond


class DegenerateProblemError(BoundedRegError):
    """Raised when the inputs leave the solver with no direction to allocate,
    e.g. all regression residuals are zero."""


class ConvergenceError(BoundedRegError):
    """Raised when an iteration cap is exceeded.

    ``state`` carries the last solver state for diagnostics.
    """

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class InfeasibleError(ConvergenceError):
    """Raised when the normalization target cannot be met under the bounds."""
