"""Configuration exceptions."""


class ConfigValidationError(ValueError):
    """Raised when a run configuration file fails validation."""

    exit_code: int = 2
