"""Exception hierarchy shared across the package."""

from __future__ import annotations


class AeffError(Exception):
    """Base class for all errors raised by this package."""


class IllScopedTermError(AeffError):
    """A renaming or strengthening hit a variable it does not cover."""


class LexError(AeffError):
    """Invalid character sequence in the input."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ParseError(AeffError):
    """Input does not match the grammar."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ScopeError(AeffError):
    """Unbound variable or undeclared operation in the source."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ContinuationArityError(AeffError):
    """A continuation was applied to the wrong sort of argument.

    Capped continuations plug values, uncapped ones plug computations.
    """


class MeasureUndefinedError(AeffError):
    """A termination measure was requested for an input it is not defined on."""


class AuditPreconditionError(AeffError):
    """The audited process is outside the fragment the measures cover."""

    def __init__(self, message: str, leaves: tuple[str, ...] = ()):
        super().__init__(message)
        self.leaves = leaves
