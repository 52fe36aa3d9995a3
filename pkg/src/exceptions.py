"""Custom exception classes for dephasim following enterprise patterns."""

from typing import Any
from typing import Optional


class DephasimException(Exception):
    """Base exception for all dephasim errors."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}


class SchemaError(DephasimException):
    """Raised when a run configuration file cannot be parsed or validated."""

    pass


class ConfigInvalidError(DephasimException):
    """Raised when a bath configuration violates a physical invariant."""

    pass


class SpecInvalidError(DephasimException):
    """Raised when an ensemble specification is inconsistent."""

    pass


class ComputeError(DephasimException):
    """Base class for numerical failures inside an evaluator or the oracle."""

    pass


class DegenerateModeError(ComputeError):
    """Raised when a mode has big_omega = 0 but a non-zero coupling."""

    pass


class TruncationTooSmallError(ComputeError):
    """Raised when the Fock basis cannot hold the state within budget."""

    pass


class EigenFailureError(ComputeError):
    """Raised when the symmetric tridiagonal eigensolver does not converge."""

    pass


class InsufficientDataError(DephasimException):
    """Raised when a fit has too few usable points."""

    pass
