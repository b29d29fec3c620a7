"""Structured error types for the simulator and its command-line front end."""

from __future__ import annotations

from typing import ClassVar, NoReturn, TypedDict


class ErrorPayload(TypedDict):
    """Structured JSON payload for simulation errors."""

    error: dict[str, object | None]


class SimulationError(Exception):
    """Structured simulation error containing a JSON-friendly payload."""

    exit_code: ClassVar[int] = 1

    def __init__(
        self, error_type: str, message: str, details: object | None = None
    ) -> None:
        """Create a structured error payload."""
        super().__init__(message)
        self.error_type = error_type
        self.error: ErrorPayload = {
            "error": {
                "type": error_type,
                "message": message,
                "details": details,
            }
        }

    def to_dict(self) -> ErrorPayload:
        """Return the structured error payload."""
        return self.error


class ConfigError(SimulationError):
    """Invalid configuration or parameter values."""

    exit_code = 2


class NumericalError(SimulationError):
    """Numerical failure: singular systems, non-convergence, non-finite output."""

    exit_code = 3


def raise_config_error(
    error_type: str, message: str, details: object | None = None
) -> NoReturn:
    """Raise a :class:`ConfigError` with a structured payload."""
    raise ConfigError(error_type=error_type, message=message, details=details)


def raise_numerical_error(
    error_type: str, message: str, details: object | None = None
) -> NoReturn:
    """Raise a :class:`NumericalError` with a structured payload."""
    raise NumericalError(error_type=error_type, message=message, details=details)


class OutputError(SimulationError):
    """Result files could not be written."""

    exit_code = 4
