"""Exception types shared across the package.

The CLI maps these onto process exit codes (see :mod:`qnoise.cli`):
syntax errors -> 2, validation errors -> 3, resource-limit errors -> 4.
"""

from __future__ import annotations


class QnoiseError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QnoiseError):
    """Invalid parameters, inconsistent inputs, or contract violations."""


class InvalidChannelError(ValidationError):
    """A Kraus set fails the completeness relation or has a bad shape."""


class ResourceLimitError(QnoiseError):
    """A configured size or memory cap would be exceeded."""


class CircuitSyntaxError(QnoiseError):
    """Parse failure in a circuit or coupling-graph file.

    Carries a 1-based line and column so tooling can point at the
    offending token.
    """

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None and col is not None:
            message = f"line {line}, col {col}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
