"""Exception hierarchy shared by the library and the command line.

Each class carries the process exit code the CLI reports for it.
"""

from __future__ import annotations


class MifiError(Exception):
    exit_code = 1


class ConfigError(MifiError, ValueError):
    exit_code = 2


class InvalidInputError(MifiError, ValueError):
    exit_code = 2


class DataError(MifiError):
    exit_code = 3


class ShapeError(DataError, ValueError):
    pass


class FormatError(DataError):
    """Malformed feature container; ``offset`` is the byte where parsing failed."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class NumericError(MifiError, ArithmeticError):
    exit_code = 4
