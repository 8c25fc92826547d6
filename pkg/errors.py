"""
Error types for the posetlab workbench
Every failure raised by the library is a PosetLabError, so the CLI can map it to an exit code
"""


class PosetLabError(Exception):
    """Base class for all posetlab errors."""


class RangeError(PosetLabError, ValueError):
    """A layer index, ground size or parameter lies outside its allowed range."""


class ArgumentError(PosetLabError, ValueError):
    """An argument combination the operation does not accept (e.g. a right shift)."""


class PreconditionError(PosetLabError, ValueError):
    """The input family violates a precondition of the operation."""


class ValidationError(PosetLabError, ValueError):
    """A poset or family description is not well formed."""


class CapacityError(PosetLabError, ValueError):
    """A construction was asked for more sets than its strategy can supply."""

    def __init__(self, message: str, achieved: int):
        super().__init__(message)
        self.achieved = achieved


class HypothesisError(PosetLabError, ValueError):
    """A formula was evaluated outside the hypothesis it is stated for."""


class ScaleError(PosetLabError):
    """An exhaustive search is too large to run without an explicit override."""


class FamilyParseError(PosetLabError, ValueError):
    """A family JSON document could not be parsed."""
