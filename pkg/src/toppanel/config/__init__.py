"""
Module: `toppanel.config`

Typed run configuration read from one YAML file.

Modules
-------
toppanel.config.params
    `RunConfig` and its `ModelSection` and `DataSection` sections.
toppanel.config.exceptions
    `ConfigValidationError`.
toppanel.config.validate
    Validation entry point.
"""

from .exceptions import ConfigValidationError
from .params import DataSection, ModelSection, RunConfig
from .validate import validate_config

__all__ = ["ConfigValidationError", "DataSection", "ModelSection", "RunConfig", "validate_config"]
