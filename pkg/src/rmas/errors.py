"""Exception types shared across the toolchain.

Every user-facing error carries a source position where one exists, so
the CLI and the service can point at the offending text.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class RmasError(Exception):
    """Base class; `code` is the stable machine-readable identifier."""

    code = "error"

    def __init__(self, message: str, pos: Pos | None = None):
        self.message = message
        self.pos = pos
        super().__init__(f"{pos}: {message}" if pos else message)


class IllegalCharacter(RmasError):
    code = "illegal-character"


class ModelSyntaxError(RmasError):
    code = "syntax-error"

    def __init__(self, message: str, pos: Pos | None = None, expected: tuple[str, ...] = ()):
        self.expected = expected
        if expected:
            message = f"{message} (expected {', '.join(expected)})"
        super().__init__(message, pos)


class DuplicateInstanceId(RmasError):
    code = "duplicate-instance-id"


class UnknownAgentType(RmasError):
    code = "unknown-agent-type"


class TypeMismatch(RmasError):
    code = "type-mismatch"


class UpdateToUndeclaredVar(RmasError):
    code = "update-to-undeclared-var"


class UnboundSymbol(RmasError):
    code = "unbound-symbol"


class UnknownLabel(RmasError):
    code = "unknown-label"


class UnknownVariable(RmasError):
    code = "unknown-variable"


class EmptyInitialSet(RmasError):
    code = "empty-initial-set"


class OracleTooLarge(RmasError):
    code = "oracle-too-large"


class StateSpaceBudgetExceeded(RmasError):
    code = "state-space-budget-exceeded"

    def __init__(self, limit: int, visited: int):
        self.limit = limit
        self.visited = visited
        super().__init__(f"state budget exceeded: visited {visited} of {limit} allowed")


class InfeasibleConstraint(RmasError):
    code = "infeasible-constraint"

    def __init__(self, message: str, near_misses: list[str] | None = None):
        self.near_misses = near_misses or []
        super().__init__(message)


class UnknownFixture(RmasError):
    code = "unknown-fixture"


class UnsupportedDomain(RmasError):
    code = "unsupported-domain"
