"""
Module: `toppanel.metrics`

Evaluation metrics: macro-averaged F1, accuracy, one-vs-rest AUROC and step-wise AUPRC for
classification tasks, MSE and R² for regression tasks, and recovery of known informative features.

Modules
-------
toppanel.metrics.classification
    Classification metrics.
toppanel.metrics.regression
    Regression metrics.
toppanel.metrics.recovery
    Selection precision and recall.
toppanel.metrics.records
    `MetricRecord`, `score_task` and `summarize_seeds`.
"""

from .classification import (
    accuracy,
    auprc_macro,
    auroc_macro_ovr,
    average_precision,
    binary_auroc,
    f1_macro,
)
from .records import (
    CLASSIFICATION_METRICS,
    REGRESSION_METRICS,
    MetricRecord,
    score_task,
    softmax,
    summarize_seeds,
)
from .recovery import selection_recovery
from .regression import mean_squared_error, r_squared

__all__ = [
    "CLASSIFICATION_METRICS",
    "REGRESSION_METRICS",
    "MetricRecord",
    "accuracy",
    "auprc_macro",
    "auroc_macro_ovr",
    "average_precision",
    "binary_auroc",
    "f1_macro",
    "mean_squared_error",
    "r_squared",
    "score_task",
    "selection_recovery",
    "softmax",
    "summarize_seeds",
]
