"""Exceptions raised by fracvol."""

from typing import Optional


class FracVolError(Exception):
    """Base exception for all fracvol errors."""


class DomainError(FracVolError, ValueError):
    """Parameter outside the domain of an operation."""


class ConfigValidationError(DomainError):
    """Invalid value in a run configuration."""

    def __init__(self, field: str, message: str) -> None:
        """Initialize with the dotted key of the offending field."""
        super().__init__(f"{field}: {message}")
        self.field = field


class InsufficientDataError(DomainError):
    """Not enough points for a regression or ladder."""


class NoArbitrageError(DomainError):
    """Option price outside the no-arbitrage band."""


class QuadratureError(FracVolError):
    """Quadrature did not converge under node doubling."""


class HistoryError(FracVolError):
    """Driving-noise history missing or too short."""


class ConsistencyError(FracVolError):
    """Two equivalent evaluations disagree."""


class NotPositiveDefiniteError(FracVolError):
    """Covariance matrix not positive definite after jitter."""

    def __init__(self, min_eigenvalue: float, message: Optional[str] = None) -> None:
        """Initialize with the most negative eigenvalue."""
        super().__init__(
            message
            or f"covariance matrix not positive definite (min eigenvalue {min_eigenvalue:.3e})"
        )
        self.min_eigenvalue = min_eigenvalue
