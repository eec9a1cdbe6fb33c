"""Exception hierarchy shared by all canyonlab modules."""


class CanyonError(Exception):
    """Base class for every error raised by canyonlab."""


class PrecisionExhausted(CanyonError):
    """A numerical decision could not be made at the available precision."""


class DivisionByUncertainZero(PrecisionExhausted, ZeroDivisionError):
    """The divisor ball contains zero."""


class TruncationAmbiguous(CanyonError):
    """A series has no known terms below its truncation order."""


class TruncationTooSmall(CanyonError):
    """The requested computation needs more terms than were computed."""


class BarMismatch(CanyonError):
    """The order of f along a polar disagrees with the sum of root contacts."""


class InconsistentCanyon(CanyonError):
    """Polars grouped in one canyon disagree on (h, a)."""


class InconsistentDevelopment(CanyonError):
    """No admissible correction term cancels the lowest surviving exponent."""

    def __init__(self, exponent, residual, message=None):
        self.exponent = exponent
        self.residual = residual
        super().__init__(message or f"cannot cancel residual term at exponent {exponent}")


class NotApplicable(CanyonError):
    """Preconditions of an invariant are not met."""


class CombinatorialBlowup(CanyonError):
    """Too many canyon matchings to enumerate."""


class ParseError(CanyonError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at offset {position}")


class UnboundParameter(ParseError):
    pass
