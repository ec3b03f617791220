"""
Module: `toppanel.baselines.mrmr`

Two-stage reference selector: greedy minimum-redundancy maximum-relevance ranking with
F-statistic relevance and Pearson redundancy, followed by retraining the model on the chosen
features with a frozen mask.

Functions
---------
f_statistic_relevance(X, labels) -> np.ndarray
f_regression_relevance(X, targets) -> np.ndarray
mrmr_select(X, labels, k, kind="classification") -> list[int]
retrain_fixed_mask(dataset, indices, model_config, train_config) -> MetricRecord
"""

from __future__ import annotations

import logging
import warnings
from typing import Sequence

import numpy as np
import pandas as pd
from sklearn.feature_selection import f_classif, f_regression

from toppanel.data import Dataset
from toppanel.exceptions import ContractError, DimensionError
from toppanel.metrics import MetricRecord
from toppanel.model import MISSING_CLASS, ModelConfig
from toppanel.model.network import TaskKind
from toppanel.selection import SelectionMask
from toppanel.training import TrainConfig, evaluate, train

logger = logging.getLogger(__name__)

F_CAP: float = 1e12


def _check_rows(X: np.ndarray, labels: np.ndarray, op: str) -> None:
    if X.ndim != 2 or labels.shape[0] != X.shape[0]:
        raise DimensionError(op, X.shape, labels.shape)


def _finite_statistic(statistic: np.ndarray) -> np.ndarray:
    """Map undefined statistics (constant columns) to 0 and infinite ones to `F_CAP`."""
    statistic = np.nan_to_num(np.asarray(statistic, dtype=np.float64), nan=0.0, posinf=F_CAP)
    return np.minimum(statistic, F_CAP)


def f_statistic_relevance(X: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """
    One-way ANOVA F-statistic of every column against class labels.

    Rows labeled ``-1`` are ignored. A column with zero within-class variance scores `F_CAP` when
    its class means differ and 0 otherwise; with fewer than two classes every column scores 0.
    """
    X = np.asarray(X, dtype=np.float64)
    classes = np.asarray(labels, dtype=np.int64).reshape(-1)
    _check_rows(X, classes, "f_statistic_relevance")
    keep = classes != MISSING_CLASS
    values, groups = X[keep], classes[keep]
    n_groups = np.unique(groups).size
    if n_groups < 2 or values.shape[0] <= n_groups:
        return np.zeros(X.shape[1])
    with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
        warnings.simplefilter("ignore", RuntimeWarning)
        statistic, _ = f_classif(values, groups)
    return _finite_statistic(statistic)


def f_regression_relevance(X: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    Univariate regression F-statistic ``r² / (1 - r²) * (n - 2)`` of every column.

    Rows with a non-finite target are ignored.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64).reshape(-1)
    _check_rows(X, y, "f_regression_relevance")
    keep = np.isfinite(y)
    if int(keep.sum()) < 3:
        return np.zeros(X.shape[1])
    with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
        warnings.simplefilter("ignore", RuntimeWarning)
        statistic, _ = f_regression(X[keep], y[keep], force_finite=False)
    return _finite_statistic(statistic)


def mrmr_select(
    X: np.ndarray,
    labels: np.ndarray,
    k: int,
    kind: TaskKind = "classification",
) -> list[int]:
    """
    Greedy mRMR ranking of `k` columns.

    The first pick maximizes the relevance; each next pick maximizes relevance minus the mean
    absolute Pearson correlation with the columns already picked. Ties go to the lowest index.
    """
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    if not 1 <= k <= d:
        raise ContractError(f"k must be in [1, {d}], got {k}")
    if kind == "classification":
        relevance = f_statistic_relevance(X, labels)
    else:
        relevance = f_regression_relevance(X, labels)
    frame = pd.DataFrame(X)
    redundancy = np.zeros(d)
    available = np.ones(d, dtype=bool)
    chosen: list[int] = []
    for _ in range(k):
        criterion = relevance - (redundancy / len(chosen) if chosen else 0.0)
        criterion = np.where(available, criterion, -np.inf)
        pick = int(np.argmax(criterion))
        chosen.append(pick)
        available[pick] = False
        with np.errstate(divide="ignore", invalid="ignore"):
            correlation = frame.corrwith(frame[pick])
        # constant columns have no correlation
        redundancy += correlation.abs().fillna(0.0).to_numpy()
    logger.debug("mRMR picked %s", chosen)
    return chosen


def retrain_fixed_mask(
    dataset: Dataset,
    indices: Sequence[int],
    model_config: ModelConfig,
    train_config: TrainConfig,
) -> MetricRecord:
    """
    Train the model with the mask frozen at `indices` and evaluate it on the test split.

    Scores are not trained and nothing is annealed; evaluation is the one of the end-to-end path.
    """
    params, report = train(dataset, model_config, train_config, fixed_indices=indices)
    if report.final_record is not None:
        return report.final_record
    return evaluate(params, model_config, dataset, mask=SelectionMask.fixed(indices, model_config.d))
