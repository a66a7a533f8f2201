"""Exception hierarchy shared by every module."""


class RandIntegralError(Exception):
    """Base class for all package errors."""


class InvalidInputError(RandIntegralError, ValueError):
    """Arguments violate an operation's preconditions."""


class DomainError(InvalidInputError):
    """A point lies outside the domain of a function."""


class DimensionError(InvalidInputError):
    """Vector or matrix shapes do not agree."""


class UnsupportedError(RandIntegralError, NotImplementedError):
    """The request is well formed but outside what is implemented."""


class QuadratureError(RandIntegralError, ArithmeticError):
    """Adaptive quadrature ran out of refinement budget.

    Attributes
    ----------
    residual : float
        Estimated absolute error of the unconverged result.
    """

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


class NumericError(RandIntegralError, ArithmeticError):
    """A computation produced a non-finite value."""
