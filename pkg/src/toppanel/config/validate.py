"""
Run configuration validation helpers.
"""

from __future__ import annotations

from typing import Any

from toppanel.config.params import RunConfig


def validate_config(data: dict[str, Any]) -> None:
    """Validate a configuration mapping by materializing the typed run configuration."""
    RunConfig.from_dict(data)
