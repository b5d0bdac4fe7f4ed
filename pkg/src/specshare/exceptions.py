"""Exception types raised across the package."""


class SpecShareError(Exception):
    """Base class for all package errors."""


class DomainError(SpecShareError, ValueError):
    """An input lies outside the domain where a formula or model is defined."""


class SingularSystemError(SpecShareError, ArithmeticError):
    """A small linear system is singular or too badly conditioned to trust."""


class InfeasibleError(SpecShareError):
    """No allocation satisfies the requested active-set pattern."""


class ConvergenceError(SpecShareError):
    """An iterative method hit its iteration cap.

    Attributes:
        residual: last observed residual when the cap was reached.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class DisagreementError(SpecShareError):
    """Independent restarts of the solver converged to different points."""

    def __init__(self, message, spread):
        super().__init__(message)
        self.spread = spread


class UnsupportedModelError(SpecShareError, TypeError):
    """The requested quantity does not exist for the given demand/latency model."""
