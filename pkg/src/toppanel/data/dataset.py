"""
Module: `toppanel.data.dataset`

Immutable container for an expression matrix with its label columns and train/test split.

Classes
-------
LabelColumn
    One task's labels: integer classes (``-1`` missing) or float targets (``NaN`` missing).
Dataset
    Feature matrix, feature names, label columns, optional ground truth and split.

Functions
---------
split(dataset, seed, test_fraction=0.2) -> Dataset
    Deterministic shuffled train/test assignment.
"""

from __future__ import annotations

from typing import Any, Mapping, Sequence

import attr
import numpy as np

from toppanel.exceptions import ContractError, DataError
from toppanel.model import MISSING_CLASS, Batch, TaskSpec
from toppanel.model.network import TaskKind

TRAIN: str = "train"
TEST: str = "test"
DEFAULT_TEST_FRACTION: float = 0.2


@attr.s(auto_attribs=True, frozen=True, eq=False)
class LabelColumn:
    """
    Labels of one task.

    Parameters
    ----------
    name : str
        Task name.
    kind : {"classification", "regression"}
        Label type.
    values : np.ndarray
        int64 classes with ``-1`` for missing, or float64 targets with ``NaN`` for missing.
    num_classes : int
        Class count for classification columns.
    """

    name: str
    kind: TaskKind
    values: np.ndarray
    num_classes: int = 0

    @property
    def observed(self) -> np.ndarray:
        if self.kind == "classification":
            return self.values != MISSING_CLASS
        return np.isfinite(self.values)

    @property
    def cardinality(self) -> int:
        """Distinct observed values."""
        return int(np.unique(self.values[self.observed]).size)

    def task_spec(self) -> TaskSpec:
        if self.kind == "classification":
            return TaskSpec.classification(self.name, self.num_classes)
        return TaskSpec.regression(self.name)


@attr.s(auto_attribs=True, frozen=True, eq=False)
class Dataset:
    """
    Expression matrix with supervision.

    Parameters
    ----------
    X : np.ndarray
        N×d float64 feature matrix.
    feature_names : tuple[str, ...]
        d feature names.
    labels : tuple[LabelColumn, ...]
        One column per task, each of length N.
    ground_truth_features : frozenset[int], optional
        Informative feature indices (synthetic data only).
    task_ground_truth : Mapping[str, tuple[int, ...]], optional
        Informative feature indices per task (synthetic data only).
    split_assignment : np.ndarray, optional
        Per-row ``"train"`` / ``"test"``.
    """

    X: np.ndarray
    feature_names: tuple[str, ...]
    labels: tuple[LabelColumn, ...]
    ground_truth_features: frozenset[int] | None = None
    task_ground_truth: Mapping[str, tuple[int, ...]] | None = None
    split_assignment: np.ndarray | None = None

    def __attrs_post_init__(self) -> None:
        if self.X.ndim != 2:
            raise DataError(f"feature matrix must be 2-D, got shape {self.X.shape}")
        n, d = self.X.shape
        if len(self.feature_names) != d:
            raise DataError(f"{len(self.feature_names)} feature names for {d} features")
        for column in self.labels:
            if column.values.shape[0] != n:
                raise DataError(
                    f"label column has {column.values.shape[0]} rows, expected {n}",
                    column=column.name,
                )
            if column.kind == "classification":
                bad = np.flatnonzero(
                    (column.values < MISSING_CLASS) | (column.values >= column.num_classes)
                )
                if bad.size:
                    raise DataError(
                        f"class label {int(column.values[bad[0]])} outside [0, {column.num_classes})",
                        row=int(bad[0]) + 1,
                        column=column.name,
                    )
        if self.split_assignment is not None and self.split_assignment.shape != (n,):
            raise DataError("split assignment must have one entry per row")

    @property
    def n_samples(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])

    def label(self, name: str) -> LabelColumn:
        for column in self.labels:
            if column.name == name:
                return column
        raise KeyError(f"Unknown label column {name!r}")

    def task_specs(self) -> tuple[TaskSpec, ...]:
        return tuple(column.task_spec() for column in self.labels)

    def _rows(self, which: str) -> np.ndarray:
        if self.split_assignment is None:
            raise ContractError("dataset has no train/test split; call split() first")
        return np.flatnonzero(self.split_assignment == which)

    @property
    def train_indices(self) -> np.ndarray:
        return self._rows(TRAIN)

    @property
    def test_indices(self) -> np.ndarray:
        return self._rows(TEST)

    def batch(self, rows: Sequence[int] | np.ndarray) -> Batch:
        """Rows `rows` of the features with every label column."""
        index = np.asarray(rows, dtype=np.int64)
        return Batch(
            X=self.X[index],
            labels={column.name: column.values[index] for column in self.labels},
        )

    def summary(self) -> dict[str, Any]:
        """Shape and per-task label cardinalities."""
        return {
            "n_samples": self.n_samples,
            "n_features": self.n_features,
            "label_cardinalities": {column.name: column.cardinality for column in self.labels},
            "missing_labels": {
                column.name: int((~column.observed).sum()) for column in self.labels
            },
        }


def split(
    dataset: Dataset, seed: int, test_fraction: float = DEFAULT_TEST_FRACTION
) -> Dataset:
    """
    Assign rows to train/test by a shuffle seeded with `seed`.

    The test set holds ``round(test_fraction * N)`` rows; the same seed always yields the same
    assignment.
    """
    if not 0.0 <= test_fraction < 1.0:
        raise ContractError(f"test_fraction must be in [0, 1), got {test_fraction}")
    n = dataset.n_samples
    order = np.random.default_rng(seed).permutation(n)
    assignment = np.full(n, TRAIN, dtype="<U5")
    assignment[order[: int(round(test_fraction * n))]] = TEST
    return attr.evolve(dataset, split_assignment=assignment)
