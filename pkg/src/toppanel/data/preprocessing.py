"""
Module: `toppanel.data.preprocessing`

Feature pre-filters applied before training: variance-ranked highly variable features and
binarization.
"""

from __future__ import annotations

import logging

import attr
import numpy as np

from toppanel.data.dataset import Dataset
from toppanel.exceptions import ContractError

logger = logging.getLogger(__name__)

DEFAULT_BINARIZE_THRESHOLD: float = 0.0


def feature_variances(X: np.ndarray) -> np.ndarray:
    """Per-column sample variance (``ddof=1``; population variance for a single row)."""
    return X.var(axis=0, ddof=1 if X.shape[0] > 1 else 0)


def hvg_filter(dataset: Dataset, top_m: int) -> Dataset:
    """
    Keep the `top_m` columns of largest sample variance.

    Ties are broken by column position and kept columns stay in their original order. Ground-truth
    indices are remapped to the new column positions; informative columns that are dropped
    disappear from the ground truth.
    """
    d = dataset.n_features
    if not 1 <= top_m <= d:
        raise ContractError(f"top_m must be in [1, {d}], got {top_m}")
    ranking = np.argsort(-feature_variances(dataset.X), kind="stable")
    kept = np.sort(ranking[:top_m])
    position = {int(old): new for new, old in enumerate(kept)}

    def remap(indices: frozenset[int] | tuple[int, ...]) -> tuple[int, ...]:
        return tuple(sorted(position[index] for index in indices if index in position))

    truth = dataset.ground_truth_features
    task_truth = dataset.task_ground_truth
    logger.debug("HVG filter kept %d of %d features", top_m, d)
    return attr.evolve(
        dataset,
        X=dataset.X[:, kept],
        feature_names=tuple(dataset.feature_names[index] for index in kept),
        ground_truth_features=None if truth is None else frozenset(remap(truth)),
        task_ground_truth=(
            None if task_truth is None else {name: remap(cols) for name, cols in task_truth.items()}
        ),
    )


def binarize(dataset: Dataset, threshold: float = DEFAULT_BINARIZE_THRESHOLD) -> Dataset:
    """Replace every value by 1.0 if it exceeds `threshold`, else 0.0."""
    return attr.evolve(dataset, X=(dataset.X > threshold).astype(np.float64))
