"""Seqspace - Error types"""

from typing import Optional


class SeqspaceError(Exception):
    """Base class for all seqspace errors"""


class DimensionMismatch(SeqspaceError, ValueError):
    """Vector, functional or operator does not match the space dimension"""

    def __init__(self, expected: int, got: int, what: str = "vector"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has length {got}, space has dimension {expected}")


class NonConvergentBracket(SeqspaceError):
    """Root bracket does not change sign (usually a corrupted Orlicz function)"""


class VerificationFailed(SeqspaceError):
    """A constructed object failed its internal numerical check"""


class DependentFunctionals(SeqspaceError, ValueError):
    """Functionals defining a subspace are linearly dependent"""


class InvariantViolation(SeqspaceError):
    """A structural invariant of a projection or operator does not hold"""


class PreconditionViolation(SeqspaceError, ValueError):
    """Operation called outside the hypotheses it is defined for"""


class ParamOutOfRange(SeqspaceError, ValueError):
    """Witness parameters lie outside the admissible range"""


class BudgetExhausted(SeqspaceError):
    """Search budget ran out without reaching a conclusion"""


class ConfigError(SeqspaceError):
    """Malformed configuration or space specification"""

    def __init__(
        self,
        message: str,
        source: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
        field: Optional[str] = None,
    ):
        self.source = source
        self.line = line
        self.column = column
        self.field = field
        super().__init__(self._format(message))

    def _format(self, message: str) -> str:
        where = []
        if self.source:
            where.append(self.source)
        if self.line is not None:
            where.append(f"line {self.line}, column {self.column}")
        if self.field:
            where.append(f"field '{self.field}'")
        return f"{': '.join(where)}: {message}" if where else message
