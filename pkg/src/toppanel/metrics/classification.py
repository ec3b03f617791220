"""
Module: `toppanel.metrics.classification`

Macro-averaged classification metrics computed from predicted classes or class scores.

All functions take labeled rows only (missing labels removed by the caller) and return ``NaN``
when the metric is undefined on the given rows.

Functions
---------
f1_macro(pred_classes, true_classes, num_classes) -> float
accuracy(pred_classes, true_classes) -> float
auroc_macro_ovr(scores, true_classes) -> float
auprc_macro(scores, true_classes) -> float
"""

from __future__ import annotations

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from toppanel.exceptions import DimensionError


def _paired(pred: ArrayLike, true: ArrayLike, op: str) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.int64).reshape(-1)
    t = np.asarray(true, dtype=np.int64).reshape(-1)
    if p.shape != t.shape:
        raise DimensionError(op, p.shape, t.shape)
    return p, t


def f1_macro(pred_classes: ArrayLike, true_classes: ArrayLike, num_classes: int) -> float:
    """
    Unweighted mean of per-class F1 scores.

    A class enters the average when it occurs in the truth or in the predictions; a class that
    occurs in neither is excluded. A class without true positives scores 0.
    """
    pred, true = _paired(pred_classes, true_classes, "f1_macro")
    if true.size == 0:
        return float("nan")
    scores = []
    for c in range(num_classes):
        in_true = true == c
        in_pred = pred == c
        if not (in_true.any() or in_pred.any()):
            continue
        tp = int(np.sum(in_true & in_pred))
        fp = int(np.sum(~in_true & in_pred))
        fn = int(np.sum(in_true & ~in_pred))
        scores.append(2.0 * tp / (2 * tp + fp + fn))
    return float(np.mean(scores)) if scores else float("nan")


def accuracy(pred_classes: ArrayLike, true_classes: ArrayLike) -> float:
    pred, true = _paired(pred_classes, true_classes, "accuracy")
    if true.size == 0:
        return float("nan")
    return float(np.mean(pred == true))


def _scores_matrix(scores: ArrayLike, true: np.ndarray, op: str) -> np.ndarray:
    matrix = np.asarray(scores, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != true.shape[0]:
        raise DimensionError(op, matrix.shape, true.shape)
    return matrix


def binary_auroc(scores: ArrayLike, positive: ArrayLike) -> float:
    """Mann-Whitney AUROC with midranks for ties; ``NaN`` without both classes."""
    s = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(positive, dtype=bool)
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = pd.Series(s).rank(method="average").to_numpy()
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def average_precision(scores: ArrayLike, positive: ArrayLike) -> float:
    """
    Step-wise area under the precision-recall curve.

    Sweeps thresholds in decreasing score order; tied scores enter together. ``NaN`` without
    positives.
    """
    s = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(positive, dtype=bool)
    n_pos = int(pos.sum())
    if n_pos == 0:
        return float("nan")
    order = np.argsort(-s, kind="stable")
    ranked = s[order]
    hits = np.cumsum(pos[order])
    cuts = np.append(np.flatnonzero(np.diff(ranked) != 0), ranked.size - 1)
    precision = hits[cuts] / (cuts + 1.0)
    recall = hits[cuts] / n_pos
    return float(np.sum(np.diff(recall, prepend=0.0) * precision))


def _macro(values: list[float]) -> float:
    defined = [value for value in values if not np.isnan(value)]
    return float(np.mean(defined)) if defined else float("nan")


def auroc_macro_ovr(scores: ArrayLike, true_classes: ArrayLike) -> float:
    """
    One-vs-rest AUROC averaged over the classes present in the truth.

    Parameters
    ----------
    scores : ArrayLike
        N×C class scores (probabilities or any monotone transform).
    true_classes : ArrayLike
        N true class indices.
    """
    true = np.asarray(true_classes, dtype=np.int64).reshape(-1)
    matrix = _scores_matrix(scores, true, "auroc_macro_ovr")
    return _macro([binary_auroc(matrix[:, c], true == c) for c in range(matrix.shape[1])])


def auprc_macro(scores: ArrayLike, true_classes: ArrayLike) -> float:
    """One-vs-rest average precision averaged over the classes present in the truth."""
    true = np.asarray(true_classes, dtype=np.int64).reshape(-1)
    matrix = _scores_matrix(scores, true, "auprc_macro")
    return _macro([average_precision(matrix[:, c], true == c) for c in range(matrix.shape[1])])
