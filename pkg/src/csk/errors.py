"""Exception hierarchy shared by every module of the package."""


class CskError(Exception):
    """Base class for all package errors."""


class SpecError(CskError, ValueError):
    """Malformed or out-of-range law specification string."""


class DomainError(CskError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class NumericalError(CskError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``residual`` carries the achieved error estimate when one is known.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge within its subdivision budget."""


class NoExtensionError(CskError):
    """The family admits no companion mean map, so it cannot be extended."""
