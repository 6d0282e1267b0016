"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so each class carries the code it
should produce when it escapes a subcommand.
"""


class FGCError(Exception):
    exit_code = 2


class RingMismatchError(FGCError, ValueError):
    """Operands live in different coefficient rings or variable sets."""


class NotAUnitError(FGCError, ArithmeticError):
    """An inversion was requested for an element that is not invertible."""


class PreconditionError(FGCError, ValueError):
    """Input violates a documented precondition (constant term, symmetry, ...)."""


class ParseError(FGCError, ValueError):
    def __init__(self, message, text="", position=None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class PrecisionError(FGCError, ArithmeticError):
    """Truncation order or t-window too small for the requested result."""

    exit_code = 3


class WindowError(PrecisionError):
    """A Laurent term would fall below the lowest admissible t-exponent."""
