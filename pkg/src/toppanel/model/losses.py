"""
Module: `toppanel.model.losses`

Per-task losses over possibly missing labels and the joint multi-task objective.

Missing labels are ``-1`` for classes and ``NaN`` for regression targets. A task averages over its
labeled rows only; the joint loss divides the sum of task losses by the total number of tasks.
"""

from __future__ import annotations

from typing import Mapping

import attr
import numpy as np

from toppanel.autodiff import (
    Tensor,
    add,
    constant,
    log_softmax_rows,
    mul,
    reduce,
    scale,
    sub,
)
from toppanel.exceptions import DataError, DimensionError
from toppanel.model.network import ModelConfig, ModelParams, TaskSpec, as_input, forward
from toppanel.selection import SelectionMask

MISSING_CLASS: int = -1


@attr.s(auto_attribs=True, frozen=True, eq=False)
class Batch:
    """Rows of the feature matrix with the matching label columns (keyed by task name)."""

    X: np.ndarray
    labels: Mapping[str, np.ndarray]

    @property
    def size(self) -> int:
        return int(self.X.shape[0])


def _zero() -> Tensor:
    return constant(0.0)


def task_loss(pred: Tensor, labels: np.ndarray, task: TaskSpec) -> Tensor:
    """
    Loss of one task over the labeled rows of a batch.

    Classification: mean softmax cross-entropy over rows whose class is not ``-1``.
    Regression: mean squared error over rows whose target is finite. A batch without labeled rows
    yields a constant 0 (no gradient).

    Raises
    ------
    DataError
        If a class index is outside ``[-1, num_classes)``.
    DimensionError
        If the label column length differs from the batch size.
    """
    rows = pred.shape[0]
    if labels.shape[0] != rows:
        raise DimensionError(f"task_loss[{task.name}]", pred.shape, labels.shape)
    if task.kind == "classification":
        return _cross_entropy(pred, labels, task)
    return _squared_error(pred, labels, task)


def _cross_entropy(pred: Tensor, labels: np.ndarray, task: TaskSpec) -> Tensor:
    classes = np.asarray(labels, dtype=np.int64)
    bad = np.flatnonzero((classes < MISSING_CLASS) | (classes >= task.num_classes))
    if bad.size:
        raise DataError(
            f"class label {int(classes[bad[0]])} outside [0, {task.num_classes})",
            row=int(bad[0]) + 1,
            column=task.name,
        )
    labeled = np.flatnonzero(classes != MISSING_CLASS)
    if labeled.size == 0:
        return _zero()
    one_hot = np.zeros(pred.shape)
    one_hot[labeled, classes[labeled]] = 1.0
    picked = reduce("sum", mul(log_softmax_rows(pred), constant(one_hot)))
    return scale(picked, -1.0 / labeled.size)


def _squared_error(pred: Tensor, labels: np.ndarray, task: TaskSpec) -> Tensor:
    targets = np.asarray(labels, dtype=np.float64).reshape(pred.shape[0], -1)
    if targets.shape[1] != pred.shape[1]:
        raise DimensionError(f"task_loss[{task.name}]", pred.shape, targets.shape)
    observed = np.all(np.isfinite(targets), axis=1)
    count = int(observed.sum())
    if count == 0:
        return _zero()
    row_mask = np.repeat(observed[:, None], targets.shape[1], axis=1).astype(np.float64)
    residual = mul(sub(pred, constant(np.where(row_mask > 0, targets, 0.0))), constant(row_mask))
    return scale(reduce("sum", mul(residual, residual)), 1.0 / (count * targets.shape[1]))


def joint_loss(
    batch: Batch,
    params: ModelParams,
    config: ModelConfig,
    mask: SelectionMask,
    relaxed: bool = False,
) -> Tensor:
    """
    Unweighted mean of the task losses over all ``T`` tasks.

    A task without labels in the batch adds 0 but still counts in ``T``.
    """
    predictions = forward(as_input(batch.X), mask, params, config, relaxed=relaxed)
    total = _zero()
    for task in config.tasks:
        total = add(total, task_loss(predictions[task.name], batch.labels[task.name], task))
    return scale(total, 1.0 / len(config.tasks))
