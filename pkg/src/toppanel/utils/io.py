"""
Module: `toppanel.utils.io`

Utility functions for file and I/O operations.

Functions
---------
load_yaml_config(path: str | Path) -> dict
    Load a YAML run configuration file and return its contents as a dictionary.
ensure_output_dir(path: Path) -> Path
    Ensure that the specified output directory exists, creating it if necessary.
write_json(path: Path, payload: Mapping, kind: str) -> Path
    Write a machine-readable output document carrying a schema version.
read_json(path: Path) -> dict
    Read a JSON document.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import yaml

from toppanel.config.exceptions import ConfigValidationError
from toppanel.exceptions import ToppanelError

OUTPUT_SCHEMA_VERSION: int = 1


def load_yaml_config(path: str | Path) -> dict[str, Any]:
    """
    Load a YAML run configuration file as a dictionary.

    Arguments
    ---------
    path : str | Path
        Path to the YAML file.

    Returns
    -------
    dict
        Contents of the YAML file; an empty file yields an empty dictionary.

    Raises
    ------
    ConfigValidationError
        If the file cannot be read, is not valid YAML or its root is not a mapping.
    """
    try:
        with open(Path(path), "r", encoding="utf-8") as f:
            content = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigValidationError(f"Cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigValidationError(f"Invalid YAML in {path}: {exc}") from exc
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigValidationError(f"Config {path} must contain a mapping at its root.")
    return content


def ensure_output_dir(path: Path) -> Path:
    """
    Ensure that the specified output directory exists, creating it if necessary.

    Arguments
    ---------
    path : Path
        Path to the output directory.
    """
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: Path, payload: Mapping[str, Any], kind: str) -> Path:
    """
    Write `payload` with ``schema_version`` and ``kind`` fields, keys sorted.

    Identical payloads always produce identical bytes.
    """
    document = {"schema_version": OUTPUT_SCHEMA_VERSION, "kind": kind, **payload}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path: Path) -> dict[str, Any]:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ToppanelError(f"Cannot read JSON document {path}: {exc}", path=str(path)) from exc
