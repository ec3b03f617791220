"""
Module: `toppanel.baselines`

Two-stage reference selection (mRMR ranking, then fixed-mask retraining).
"""

from .mrmr import (
    F_CAP,
    f_regression_relevance,
    f_statistic_relevance,
    mrmr_select,
    retrain_fixed_mask,
)

__all__ = [
    "F_CAP",
    "f_regression_relevance",
    "f_statistic_relevance",
    "mrmr_select",
    "retrain_fixed_mask",
]
