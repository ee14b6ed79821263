"""Exception hierarchy shared by the library and mapped to CLI exit codes."""

from __future__ import annotations


class SparseFOError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InputError(SparseFOError, ValueError):
    """Malformed input: bad file syntax, arity mismatch, unknown symbol, ..."""

    exit_code = 2


class GuardednessError(InputError):
    """A tuple or function link is not covered by the guard graph or forest."""


class FormulaSyntaxError(InputError):
    """A formula could not be parsed; carries the offending position."""

    def __init__(self, message: str, position: int | None = None, text: str | None = None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
            if text is not None:
                snippet = text[max(0, position - 10): position + 10]
                message = f"{message}: ...{snippet}..."
        super().__init__(message)


class ResourceCap(SparseFOError):
    """An explicit resource limit was exceeded; the answer is unknown, never wrong."""

    exit_code = 3


class VerificationError(SparseFOError, AssertionError):
    """An internal consistency check failed (a bug, never an input problem)."""

    exit_code = 1
