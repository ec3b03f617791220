"""
Module: `toppanel.model`

Shared encoder, task heads, multi-task losses and checkpoints.

Modules
-------
toppanel.model.network
    Task and model configuration, parameters, masked forward pass.
toppanel.model.losses
    Cross-entropy / squared-error task losses and the joint loss.
toppanel.model.checkpoint
    Lossless JSON checkpoints.
"""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .losses import MISSING_CLASS, Batch, joint_loss, task_loss
from .network import (
    ModelConfig,
    ModelParams,
    TaskSpec,
    apply_mask,
    as_input,
    encode,
    forward,
    init_params,
    predict,
)

__all__ = [
    "MISSING_CLASS",
    "Batch",
    "Checkpoint",
    "ModelConfig",
    "ModelParams",
    "TaskSpec",
    "apply_mask",
    "as_input",
    "encode",
    "forward",
    "init_params",
    "joint_loss",
    "load_checkpoint",
    "predict",
    "save_checkpoint",
    "task_loss",
]
