"""
Module: `toppanel.data.synthetic`

Synthetic expression matrices with known informative features.

Features are i.i.d. standard normal. Every task depends on its own set of ``g`` informative
columns; ``shared_fraction`` of each set is common to all tasks and the remainder is private.
Class labels are the argmax of ``C`` random linear functions of the informative signal plus
Gaussian noise; regression targets are one random linear function plus noise. In ``xor-pairs``
mode the signal is the sign product of consecutive informative column pairs, which no linear
selector can detect from single columns.

Classes
-------
SynthTask
    Label type, class count and missing-label rate of one task.
SynthSpec
    Size, informative count, task list, overlap, noise, nonlinearity and seed.

Functions
---------
generate_synthetic(spec) -> Dataset
"""

from __future__ import annotations

import logging
from typing import Any, Literal

import attr
import numpy as np

from toppanel.data.dataset import Dataset, LabelColumn
from toppanel.exceptions import ContractError
from toppanel.model import MISSING_CLASS
from toppanel.model.network import TaskKind

logger = logging.getLogger(__name__)

Nonlinearity = Literal["linear", "xor-pairs"]


@attr.s(auto_attribs=True, frozen=True)
class SynthTask:
    """
    One synthetic supervision signal.

    Parameters
    ----------
    name : str
        Label column name.
    kind : {"classification", "regression"}
        Label type.
    num_classes : int
        Number of classes (classification only).
    missing_rate : float
        Probability that a row's label is masked.
    """

    name: str
    kind: TaskKind = "classification"
    num_classes: int = 2
    missing_rate: float = 0.0

    def __attrs_post_init__(self) -> None:
        if self.kind not in ("classification", "regression"):
            raise ContractError(f"task {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "classification" and self.num_classes < 2:
            raise ContractError(f"task {self.name!r}: num_classes must be >= 2")
        if not 0.0 <= self.missing_rate <= 1.0:
            raise ContractError(f"task {self.name!r}: missing_rate must be in [0, 1]")


@attr.s(auto_attribs=True, frozen=True)
class SynthSpec:
    """
    Recipe of a synthetic dataset.

    Parameters
    ----------
    n_samples : int
        Number of rows N.
    n_features : int
        Number of columns d.
    n_informative : int
        Informative columns per task g (g <= d).
    tasks : tuple[SynthTask, ...]
        Supervision signals.
    shared_fraction : float
        Fraction of each informative set common to all tasks.
    noise_sigma : float
        Standard deviation of the label noise.
    nonlinearity : {"linear", "xor-pairs"}
        Signal construction.
    seed : int
        Seed of every random draw.
    """

    n_samples: int = 2000
    n_features: int = 100
    n_informative: int = 8
    tasks: tuple[SynthTask, ...] = (SynthTask(name="y_task0", num_classes=4),)
    shared_fraction: float = 1.0
    noise_sigma: float = 0.5
    nonlinearity: Nonlinearity = "linear"
    seed: int = 0

    def __attrs_post_init__(self) -> None:
        if self.n_samples < 1 or self.n_features < 1:
            raise ContractError("n_samples and n_features must be positive")
        if not 1 <= self.n_informative <= self.n_features:
            raise ContractError(
                f"n_informative must be in [1, {self.n_features}], got {self.n_informative}"
            )
        if not self.tasks:
            raise ContractError("a synthetic dataset needs at least one task")
        if len({task.name for task in self.tasks}) != len(self.tasks):
            raise ContractError("task names must be unique")
        if not 0.0 <= self.shared_fraction <= 1.0:
            raise ContractError("shared_fraction must be in [0, 1]")
        if self.noise_sigma < 0:
            raise ContractError("noise_sigma must be non-negative")
        if self.nonlinearity not in ("linear", "xor-pairs"):
            raise ContractError(f"unknown nonlinearity {self.nonlinearity!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_samples": self.n_samples,
            "n_features": self.n_features,
            "n_informative": self.n_informative,
            "tasks": [attr.asdict(task) for task in self.tasks],
            "shared_fraction": self.shared_fraction,
            "noise_sigma": self.noise_sigma,
            "nonlinearity": self.nonlinearity,
            "seed": self.seed,
        }


def _informative_sets(spec: SynthSpec, rng: np.random.Generator) -> list[np.ndarray]:
    g = spec.n_informative
    n_shared = int(round(spec.shared_fraction * g))
    order = rng.permutation(spec.n_features)
    shared = order[:n_shared]
    pool = order[n_shared:]
    private_size = g - n_shared
    sets = []
    for position in range(len(spec.tasks)):
        start = position * private_size
        if start + private_size <= pool.size:
            private = pool[start : start + private_size]
        else:
            # Not enough columns for disjoint private sets: draw with overlap.
            private = rng.choice(pool, size=private_size, replace=False)
        sets.append(np.sort(np.concatenate([shared, private])))
    return sets


def _signal(X: np.ndarray, columns: np.ndarray, nonlinearity: Nonlinearity) -> np.ndarray:
    if nonlinearity == "linear" or columns.size < 2:
        return X[:, columns]
    pairs = columns[: columns.size - columns.size % 2].reshape(-1, 2)
    products = np.sign(X[:, pairs[:, 0]] * X[:, pairs[:, 1]])
    if columns.size % 2:
        products = np.hstack([products, X[:, columns[-1:]]])
    return products


def _class_directions(rng: np.random.Generator, width: int, num_classes: int) -> np.ndarray:
    """
    Random ``width × C`` weight matrix.

    With ``width >= C`` the columns are centred orthonormal directions, so the class logits are
    exchangeable and the classes balanced.
    """
    if width < num_classes:
        return rng.standard_normal((width, num_classes))
    basis, _ = np.linalg.qr(rng.standard_normal((width, num_classes)))
    centred = basis - basis.mean(axis=1, keepdims=True)
    return np.sqrt(width) * centred


def _labels(
    task: SynthTask,
    inputs: np.ndarray,
    noise_sigma: float,
    rng: np.random.Generator,
) -> LabelColumn:
    n, width = inputs.shape
    if task.kind == "classification":
        weights = _class_directions(rng, width, task.num_classes)
        logits = inputs @ weights + noise_sigma * rng.standard_normal((n, task.num_classes))
        values: np.ndarray = np.argmax(logits, axis=1).astype(np.int64)
        hidden = rng.random(n) < task.missing_rate
        values[hidden] = MISSING_CLASS
        return LabelColumn(task.name, "classification", values, task.num_classes)
    beta = rng.standard_normal(width) / np.sqrt(width)
    targets = inputs @ beta + noise_sigma * rng.standard_normal(n)
    hidden = rng.random(n) < task.missing_rate
    targets[hidden] = np.nan
    return LabelColumn(task.name, "regression", targets)


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """
    Draw a dataset from `spec`.

    The same spec (seed included) always yields the same dataset. ``ground_truth_features`` is
    the union of the per-task informative sets.
    """
    rng = np.random.default_rng(spec.seed)
    X = rng.standard_normal((spec.n_samples, spec.n_features))
    sets = _informative_sets(spec, rng)
    labels = tuple(
        _labels(task, _signal(X, columns, spec.nonlinearity), spec.noise_sigma, rng)
        for task, columns in zip(spec.tasks, sets)
    )
    truth = frozenset(int(index) for columns in sets for index in columns)
    width = len(str(spec.n_features - 1))
    dataset = Dataset(
        X=X,
        feature_names=tuple(f"g{index:0{width}d}" for index in range(spec.n_features)),
        labels=labels,
        ground_truth_features=truth,
        task_ground_truth={
            task.name: tuple(int(index) for index in columns)
            for task, columns in zip(spec.tasks, sets)
        },
    )
    logger.info(
        "Generated synthetic dataset N=%d d=%d with %d informative feature(s)",
        spec.n_samples,
        spec.n_features,
        len(truth),
    )
    return dataset
