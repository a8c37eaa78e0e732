"""Exception types shared across the package."""


class CurveHedgeError(Exception):
    """Base class for all domain-level errors raised by this package."""


class DomainError(CurveHedgeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UndefinedDurationError(CurveHedgeError, ZeroDivisionError):
    """Duration-style statistics are undefined for a zero present value."""


class CalibrationError(CurveHedgeError):
    """A curve fit or parameter calibration cannot be completed."""


class AlphaNotWellDefinedError(CalibrationError):
    """The convergence-speed parameter is not pinned down by its criterion.

    Raised when the forward rate at the last liquid point is already within
    the convergence tolerance of the ultimate forward rate, so every
    admissible speed satisfies the criterion.
    """


class DefectiveCurveError(CurveHedgeError):
    """An extrapolated curve has nonpositive discount factors where needed."""


class PlanKindError(CurveHedgeError, ValueError):
    """A hedge plan of the wrong kind was passed to a verification routine."""


class EvaluationError(CurveHedgeError):
    """A functional produced a non-finite value during numeric differencing."""

    def __init__(self, message, eps=None):
        super().__init__(message)
        self.eps = eps


class InputFormatError(CurveHedgeError, ValueError):
    """An input file could not be parsed.

    Carries the offending path and, for line-oriented formats, the
    1-based line number.
    """

    def __init__(self, message, path=None, line=None):
        loc = str(path) if path is not None else ""
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line
