"""
Module: `toppanel.metrics.regression`

Error metrics of regression tasks over labeled rows.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from toppanel.exceptions import DimensionError


def _paired(pred: ArrayLike, true: ArrayLike, op: str) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(true, dtype=np.float64).reshape(-1)
    if p.shape != t.shape:
        raise DimensionError(op, p.shape, t.shape)
    return p, t


def mean_squared_error(pred: ArrayLike, true: ArrayLike) -> float:
    p, t = _paired(pred, true, "mean_squared_error")
    if t.size == 0:
        return float("nan")
    return float(np.mean((p - t) ** 2))


def r_squared(pred: ArrayLike, true: ArrayLike) -> float:
    """Coefficient of determination; ``NaN`` when the targets are constant."""
    p, t = _paired(pred, true, "r_squared")
    total = float(np.sum((t - t.mean()) ** 2)) if t.size else 0.0
    if total == 0.0:
        return float("nan")
    return 1.0 - float(np.sum((p - t) ** 2)) / total
