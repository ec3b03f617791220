"""
Module: `toppanel.model.checkpoint`

JSON checkpoints holding the model configuration, every parameter tensor and run metadata.

Floats are stored with `float.hex`, so a save/load round trip is bit-exact.

Functions
---------
save_checkpoint(path, config, params, metadata) -> Path
load_checkpoint(path) -> Checkpoint
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import attr
import numpy as np

from toppanel.autodiff import parameter
from toppanel.exceptions import CheckpointError, ToppanelError
from toppanel.model.network import ModelConfig, ModelParams

CHECKPOINT_SCHEMA_VERSION: int = 1


@attr.s(auto_attribs=True, frozen=True, eq=False)
class Checkpoint:
    """Loaded checkpoint content."""

    config: ModelConfig
    params: ModelParams
    metadata: dict[str, Any]


def _encode_array(values: np.ndarray) -> dict[str, Any]:
    return {"shape": list(values.shape), "hex": [float(v).hex() for v in values.reshape(-1)]}


def _decode_array(payload: Mapping[str, Any]) -> np.ndarray:
    flat = np.array([float.fromhex(item) for item in payload["hex"]], dtype=np.float64)
    return flat.reshape(tuple(payload["shape"]))


def save_checkpoint(
    path: Path,
    config: ModelConfig,
    params: ModelParams,
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    """Write `config`, `params` and `metadata` to `path` as JSON."""
    document = {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "config": config.to_dict(),
        "params": {name: _encode_array(tensor.values) for name, tensor in params.named_tensors()},
        "metadata": dict(metadata or {}),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=1), encoding="utf-8")
    return path


def _parse_document(document: Mapping[str, Any], path: Path) -> Checkpoint:
    config = ModelConfig.from_dict(document["config"])
    stored = document["params"]

    def take(name: str) -> Any:
        if name not in stored:
            raise CheckpointError(f"Checkpoint lacks tensor {name!r}", path=str(path))
        return parameter(_decode_array(stored[name]), name)

    depth = len(config.layer_widths) - 1
    params = ModelParams(
        scores=take("scores"),
        encoder=[
            (take(f"encoder.{index}.weight"), take(f"encoder.{index}.bias"))
            for index in range(depth)
        ],
        heads={
            task.name: (take(f"heads.{task.name}.weight"), take(f"heads.{task.name}.bias"))
            for task in config.tasks
        },
    )
    return Checkpoint(config=config, params=params, metadata=dict(document.get("metadata", {})))


def load_checkpoint(path: Path) -> Checkpoint:
    """
    Read a checkpoint written by `save_checkpoint`.

    Raises
    ------
    CheckpointError
        If the file is missing, not JSON, of another schema version, lacks a tensor or is
        otherwise malformed.
    """
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"Cannot read checkpoint {path}: {exc}", path=str(path)) from exc
    if not isinstance(document, dict):
        raise CheckpointError(f"Checkpoint {path} is not a JSON object", path=str(path))
    version = document.get("schema_version")
    if version != CHECKPOINT_SCHEMA_VERSION:
        raise CheckpointError(
            f"Unsupported checkpoint schema_version {version!r}", path=str(path)
        )
    try:
        return _parse_document(document, path)
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError, ToppanelError) as exc:
        raise CheckpointError(
            f"Malformed checkpoint {path}: {type(exc).__name__}: {exc}", path=str(path)
        ) from exc
