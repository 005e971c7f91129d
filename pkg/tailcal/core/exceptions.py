"""Exceptions raised by the tailcal library."""
from __future__ import annotations

from typing import Any


class TailcalError(Exception):
    """Base class for all tailcal errors."""

    exit_code = 1
    key = "unknown"

    def __init__(self, message: str = "", diagnostics: dict[str, Any] | None = None) -> None:
        """Initialize the error with optional diagnostics."""
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(TailcalError):
    """Error to indicate an invalid configuration or argument."""

    exit_code = 2
    key = "config_error"


class RangeError(ConfigError, ValueError):
    """Error to indicate a value outside its allowed range."""


class GridError(ConfigError, ValueError):
    """Error to indicate a time that is not on the sample grid."""


class UnsupportedQueryError(ConfigError):
    """Error to indicate a query the model class cannot answer."""


class DataError(TailcalError):
    """Error to indicate unusable input data."""

    exit_code = 3
    key = "data_error"


class SchemaError(DataError):
    """Error to indicate mismatched columns, rates or dimensions."""


class SizeError(DataError):
    """Error to indicate too few samples for the requested fit."""


class NumericalError(TailcalError):
    """Error to indicate a numerical degeneracy."""

    exit_code = 4
    key = "numerical_error"


class MatrixError(NumericalError):
    """Error to indicate a matrix that is not symmetric positive definite."""


class DegeneracyError(NumericalError):
    """Error to indicate a singular or collapsed fit."""


class ResolutionError(NumericalError):
    """Error to indicate too few Monte-Carlo samples for a quantile."""
