"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class LastSuccessError(Exception):
    """Base class for all errors raised by ``lastsuccess``."""


class EmptyInstance(LastSuccessError, ValueError):
    """The probability vector has no entries."""


class OutOfRange(LastSuccessError, ValueError):
    """An entry is not a finite real in (0, 1]. ``index`` is 1-based."""

    def __init__(self, index: int, value: object):
        self.index = index
        self.value = value
        super().__init__(f"p[{index}] = {value!r} is not a finite probability in (0, 1]")


class ThresholdMismatch(LastSuccessError, ValueError):
    pass


class DegenerateConditioning(LastSuccessError, ArithmeticError):
    """P(at least one success) is too close to zero to condition on."""


class TailContainsCertainty(LastSuccessError, ValueError):
    pass


class DomainViolation(LastSuccessError, ValueError):
    pass


class TooLarge(LastSuccessError, ValueError):
    pass


class BoundViolation(LastSuccessError, AssertionError):
    """A lower bound exceeded the value it is supposed to bound.

    ``report`` holds the full :class:`~lastsuccess.bounds.BoundReport` when
    the violation was found while building one.
    """

    def __init__(self, name: str, gap: float, report=None):
        self.name = name
        self.gap = gap
        self.report = report
        super().__init__(f"bound {name!r} exceeds its target by {-gap:.3e}")


class Mismatch(LastSuccessError, AssertionError):
    def __init__(self, message: str, payload: dict):
        self.payload = payload
        super().__init__(f"{message}: {payload}")


class RejectionCapExceeded(LastSuccessError, RuntimeError):
    pass
