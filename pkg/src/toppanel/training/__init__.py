"""
Module: `toppanel.training`

Optimization of the selector and the multi-task model.

Modules
-------
toppanel.training.optimizer
    Adam with bias correction.
toppanel.training.trainer
    Training loop, held-out evaluation and single-task restriction.
"""

from .optimizer import AdamConfig, AdamState, adam_step
from .trainer import (
    TrainConfig,
    TrainReport,
    eval_mask,
    evaluate,
    ranked_selection,
    single_task_mode,
    train,
)

__all__ = [
    "AdamConfig",
    "AdamState",
    "TrainConfig",
    "TrainReport",
    "adam_step",
    "eval_mask",
    "evaluate",
    "ranked_selection",
    "single_task_mode",
    "train",
]
