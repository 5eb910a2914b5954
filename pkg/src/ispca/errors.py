"""Exception hierarchy shared by the library and the command-line tool."""

from __future__ import annotations


class ISPCAError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ISPCAError, ValueError):
    """Input arrays or arguments violate a precondition."""


class DataFormatError(InvalidInputError):
    """A data file could not be parsed (ragged rows, bad cells, missing columns)."""


class NoSignalError(ISPCAError):
    """Nothing left to extract: the matrix or score vector is identically zero."""


class ConvergenceError(ISPCAError, ArithmeticError):
    """An iterative solver hit its iteration cap without meeting its tolerance."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
