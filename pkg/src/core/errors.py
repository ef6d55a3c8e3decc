"""Exception hierarchy shared by every toolkit layer."""

from typing import Optional


class PfqError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str, *, source: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.source = source
        self.line = line
        self.column = column

    def location(self) -> str:
        parts = [self.source or "<input>"]
        if self.line is not None:
            parts.append(str(self.line))
            if self.column is not None:
                parts.append(str(self.column))
        return ":".join(parts)

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.location()}: {self.message}"


class ConfigError(PfqError):
    """Invalid configuration value."""


# IR

class IRSyntaxError(PfqError):
    """Malformed `.mir` text."""


class IRValidationError(PfqError):
    """Structurally invalid program (labels, terminators, phi placement)."""


class InterpretError(PfqError):
    """Concrete execution failed."""


class FuelExhaustedError(InterpretError):
    """Step budget exhausted; the program may not terminate."""


class UnassignedVariableError(InterpretError):
    """A variable was read before any assignment."""


class MissingInputError(InterpretError):
    """An input parameter has no value."""


class SsaConstructionError(PfqError):
    """A variable is used before definition along some path."""


# Paths

class PathError(PfqError):
    """Path walking failed."""


class DecisionUnderrunError(PathError):
    """More conditional branches were reached than decisions supplied."""


# Formulas

class FormulaSyntaxError(PfqError):
    """Malformed STP or SMT-LIB2 text."""


class SortError(PfqError):
    """Ill-sorted term."""


class OracleBoundError(PfqError):
    """The brute-force state space exceeds the configured bound."""


class SplitRangeError(PfqError):
    """Section count out of range for prefix splitting."""


# Benchmarking

class BenchError(PfqError):
    """Benchmark harness failure."""


class SolverNotFoundError(BenchError):
    """The solver executable could not be started."""


class DiffTableError(BenchError):
    """Records cannot form a time-diff table."""
