"""
Exception hierarchy.

Validation problems are ``ValueError`` subclasses so callers that only
care about "bad input" can keep catching ``ValueError``; resource guards
form a separate branch so the CLI can report them with their own exit code.
"""

from __future__ import annotations


class TiqcaError(Exception):
    """Base class for every error raised by the package."""


# ---------------------------------------------------------------------------
# Invalid input
# ---------------------------------------------------------------------------

class InvalidInput(TiqcaError, ValueError):
    """Input that violates a documented precondition."""


class InvalidConfig(InvalidInput):
    pass


class InvalidLevel(InvalidInput):
    pass


class NotNormalized(InvalidInput):
    pass


class ConfigMismatch(InvalidInput):
    pass


class InvalidPulse(InvalidInput):
    pass


class ModeMismatch(InvalidInput):
    pass


class InvalidCircuit(InvalidInput):
    pass


class NotUnitary(InvalidInput):
    pass


class NotSpecialUnitary(InvalidInput):
    pass


class RoutingError(InvalidInput):
    pass


class PointerNotHome(InvalidInput):
    pass


class PartitionTooSmall(InvalidInput):
    pass


class InvalidScaling(InvalidInput):
    pass


class InvalidParams(InvalidInput):
    pass


class FormatError(InvalidInput):
    """A value that has no representation in a text format."""


class ParseError(InvalidInput):
    """Malformed text input, located by 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{where}{message}")


class NormDriftError(TiqcaError):
    """State norm left the 1e-10 band around 1."""


class CrossCheckError(TiqcaError):
    """Logical fast path and pulse-level simulation disagree."""


# ---------------------------------------------------------------------------
# Resource guards
# ---------------------------------------------------------------------------

class GuardError(TiqcaError):
    """A computation refused because it would exceed a size guard."""


class SupportOverflow(GuardError):
    pass


class OracleTooLarge(GuardError):
    pass


class ScaleOverflow(GuardError):
    pass
