"""
Custom exception classes for posipath.

Every failure carries a machine-readable error code, the CLI exit code it
maps to, and a details dictionary (residuals, brackets, violated rules).
"""
from __future__ import annotations

from typing import Any, Dict, Optional


class PosipathException(Exception):
    """Base exception class for all posipath errors."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        exit_code: int = 1,
        details: Optional[Dict[str, Any]] = None,
    ):
        """
        Initialize a posipath exception.

        Args:
            message: Human-readable error message
            error_code: Machine-readable error code
            exit_code: Process exit code used by the CLI
            details: Additional error details
        """
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.__class__.__name__
        self.exit_code = exit_code
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for JSON error output."""
        return {
            "error": self.error_code,
            "message": self.message,
            "details": self.details,
        }


class ValidationError(PosipathException):
    """Raised when input validation or a precondition fails."""

    def __init__(self, message: str, field: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="VALIDATION_ERROR",
            exit_code=2,
            details={"field": field, **(details or {})},
        )


class DimensionError(ValidationError):
    """Raised on odd, mismatched or non-square dimensions."""

    def __init__(self, message: str, shape: Any = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, field="dim", details={"shape": shape, **(details or {})})
        self.error_code = "DIMENSION_ERROR"


class UnsupportedError(PosipathException):
    """Raised for dimensions or strata outside the supported range."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="UNSUPPORTED",
            exit_code=2,
            details=details or {},
        )


class InfeasibleRouteError(PosipathException):
    """Raised when a requested positive path cannot exist."""

    def __init__(self, message: str, rule: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="ROUTE_INFEASIBLE",
            exit_code=3,
            details={"rule": rule, **(details or {})},
        )
        self.rule = rule


class NumericalError(PosipathException):
    """Raised when a computation fails to reach its tolerance."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="NUMERICAL_ERROR",
            exit_code=4,
            details=details or {},
        )


class ConfigurationError(PosipathException):
    """Raised when there's a configuration issue."""

    def __init__(self, message: str, config_key: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="CONFIGURATION_ERROR",
            exit_code=2,
            details={"config_key": config_key, **(details or {})},
        )


def exit_code_for(exc: BaseException) -> int:
    """Map any exception to a CLI exit code."""
    if isinstance(exc, PosipathException):
        return exc.exit_code
    return 4
