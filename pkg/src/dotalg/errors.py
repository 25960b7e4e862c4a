"""Exception hierarchy; each class carries the CLI exit code it maps to."""

from __future__ import annotations


class DotAlgError(Exception):
    exit_code = 1


class ParseError(DotAlgError):
    exit_code = 2

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class ValidationError(DotAlgError):
    exit_code = 3


class InterfaceMismatch(ValidationError):
    pass


class PreconditionError(ValidationError):
    pass


class InvalidInput(ValidationError):
    pass


class ResourceLimit(DotAlgError):
    exit_code = 4


class UnresolvedAcceptance(DotAlgError):
    """Raised when no positive lower bound on the acceptance probability is found."""

    exit_code = 5

    def __init__(self, message: str, upper_bound):
        self.upper_bound = upper_bound
        super().__init__(message)
