"""
Module: `toppanel.metrics.records`

Per-task metric records and their aggregation across seeds.

Classes
-------
MetricRecord
    Metrics of every task at one evaluation point, with selection recovery when known.

Functions
---------
score_task(task, outputs, labels) -> dict[str, float]
    All metrics of one task from raw head outputs.
summarize_seeds(records) -> dict[str, dict[str, Any]]
    Mean and population standard deviation of every metric across runs.
"""

from __future__ import annotations

import math
from typing import Any, Mapping, Sequence

import attr
import numpy as np
import pandas as pd

from toppanel.metrics.classification import accuracy, auprc_macro, auroc_macro_ovr, f1_macro
from toppanel.metrics.regression import mean_squared_error, r_squared
from toppanel.model import MISSING_CLASS, TaskSpec

CLASSIFICATION_METRICS: tuple[str, ...] = ("f1_macro", "accuracy", "auroc_macro_ovr", "auprc_macro")
REGRESSION_METRICS: tuple[str, ...] = ("mse", "r2")


def _json_float(value: float) -> float | None:
    return None if math.isnan(value) else float(value)


def _from_json(value: float | None) -> float:
    return float("nan") if value is None else float(value)


@attr.s(auto_attribs=True, frozen=True)
class MetricRecord:
    """
    Metrics at one evaluation point.

    Parameters
    ----------
    tasks : Mapping[str, Mapping[str, float]]
        Metric values per task name. ``NaN`` marks an undefined metric.
    selection : Mapping[str, float], optional
        ``precision`` and ``recall`` of the selected panel against the ground truth.
    step : int, optional
        Optimizer step of the evaluation.
    epoch : int, optional
        Epoch of the evaluation.
    """

    tasks: Mapping[str, Mapping[str, float]]
    selection: Mapping[str, float] | None = None
    step: int | None = None
    epoch: int | None = None

    def flat(self) -> dict[str, float]:
        """Metrics keyed ``"<task>.<metric>"`` and ``"selection.<metric>"``."""
        values = {
            f"{task}.{name}": float(value)
            for task, metrics in self.tasks.items()
            for name, value in metrics.items()
        }
        for name, value in (self.selection or {}).items():
            values[f"selection.{name}"] = float(value)
        return values

    @property
    def undefined(self) -> tuple[str, ...]:
        """Keys of the metrics that are ``NaN``."""
        return tuple(key for key, value in self.flat().items() if math.isnan(value))

    def to_dict(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "epoch": self.epoch,
            "tasks": {
                task: {name: _json_float(value) for name, value in metrics.items()}
                for task, metrics in self.tasks.items()
            },
            "selection": (
                None
                if self.selection is None
                else {name: _json_float(value) for name, value in self.selection.items()}
            ),
            "undefined": list(self.undefined),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MetricRecord":
        selection = data.get("selection")
        return cls(
            tasks={
                task: {name: _from_json(value) for name, value in metrics.items()}
                for task, metrics in data["tasks"].items()
            },
            selection=(
                None
                if selection is None
                else {name: _from_json(value) for name, value in selection.items()}
            ),
            step=data.get("step"),
            epoch=data.get("epoch"),
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    weights = np.exp(shifted)
    return weights / weights.sum(axis=1, keepdims=True)


def score_task(task: TaskSpec, outputs: np.ndarray, labels: np.ndarray) -> dict[str, float]:
    """
    Metrics of `task` on the labeled rows.

    Classification outputs are logits; predicted classes are their argmax and the class scores
    their softmax. Regression outputs are compared with the finite targets.
    """
    if task.kind == "classification":
        classes = np.asarray(labels, dtype=np.int64)
        labeled = classes != MISSING_CLASS
        logits = outputs[labeled]
        truth = classes[labeled]
        predicted = np.argmax(logits, axis=1) if truth.size else truth
        probabilities = softmax(logits) if truth.size else logits
        return {
            "f1_macro": f1_macro(predicted, truth, task.num_classes),
            "accuracy": accuracy(predicted, truth),
            "auroc_macro_ovr": auroc_macro_ovr(probabilities, truth),
            "auprc_macro": auprc_macro(probabilities, truth),
        }
    targets = np.asarray(labels, dtype=np.float64).reshape(outputs.shape[0], -1)
    labeled = np.all(np.isfinite(targets), axis=1)
    return {
        "mse": mean_squared_error(outputs[labeled], targets[labeled]),
        "r2": r_squared(outputs[labeled], targets[labeled]),
    }


def summarize_seeds(records: Sequence[MetricRecord]) -> dict[str, dict[str, Any]]:
    """
    Aggregate the same metrics over several runs.

    Returns, per ``"<task>.<metric>"`` key, the mean and population standard deviation over the
    runs where the metric is defined, the number of defined runs ``n`` and of undefined runs
    ``n_nan``. A metric undefined in every run has ``None`` mean and std.
    """
    if not records:
        return {}
    frame = pd.DataFrame([record.flat() for record in records])
    means = frame.mean(skipna=True)
    stds = frame.std(ddof=0, skipna=True)
    missing = frame.isna().sum()
    summary = {}
    for key in frame.columns:
        defined = int(len(frame) - missing[key])
        summary[str(key)] = {
            "mean": _json_float(float(means[key])) if defined else None,
            "std": _json_float(float(stds[key])) if defined else None,
            "n": defined,
            "n_nan": int(missing[key]),
        }
    return summary
