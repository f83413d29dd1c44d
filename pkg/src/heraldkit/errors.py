"""Exception types shared across the package."""


class HeraldError(Exception):
    """Base class for all heraldkit errors."""


class ParameterError(HeraldError, ValueError):
    """A precondition on input parameters was violated."""


class ZeroDenominatorError(HeraldError, ZeroDivisionError):
    """A ratio is undefined because a denominator count or probability is zero.

    Carries the name of the offending quantity in ``quantity``.
    """

    def __init__(self, quantity, message=None):
        self.quantity = quantity
        super().__init__(message or f"denominator {quantity!r} is zero")


class BracketError(HeraldError, ValueError):
    """A root or fit target lies outside the achievable bracket."""


class DivergentSumError(HeraldError, ValueError):
    """A series required by the computation does not converge."""


class StreamOrderError(HeraldError, ValueError):
    """A time-tag stream was not sorted by time."""
