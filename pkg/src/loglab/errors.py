"""Exception types shared across the package."""


class LoglabError(Exception):
    """Base class for all errors raised by loglab."""


class DomainError(LoglabError, ValueError):
    """An argument lies outside the domain of the operation (e.g. a negative population)."""


class UsageError(LoglabError, TypeError):
    """An operation was called with an inconsistent combination of arguments."""


class NumericalError(LoglabError, ArithmeticError):
    """A non-finite value appeared during a computation.

    Attributes
    ----------
    t : float or None
        Time at which the offending value was produced, when known.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SingularDenominator(DomainError):
    """A rational map was evaluated where its denominator vanishes."""

    def __init__(self, x, message=None):
        super().__init__(message or f"denominator vanishes at x={x!r}")
        self.x = x
