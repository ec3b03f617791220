"""
Module: `toppanel.selection`

Differentiable top-k feature selection from learnable scores.

Modules
-------
toppanel.selection.operator
    Relaxed permutation, top-k masks, straight-through selection, Plackett-Luce likelihood.
toppanel.selection.schedules
    Temperature, noise and subset-size annealing.
"""

from .operator import (
    RelaxedPermutation,
    ScoreVector,
    SelectionMask,
    gumbel_perturb,
    hard_topk,
    pairwise_abs_diff,
    pl_log_prob,
    relaxed_permutation,
    straight_through_mask,
    topk_relaxed_mask,
)
from .schedules import (
    ScheduleConfig,
    SparsitySchedule,
    TemperatureSchedule,
    k_at,
    noise_scale_at,
    temperature_at,
)

__all__ = [
    "RelaxedPermutation",
    "ScoreVector",
    "SelectionMask",
    "ScheduleConfig",
    "SparsitySchedule",
    "TemperatureSchedule",
    "gumbel_perturb",
    "hard_topk",
    "k_at",
    "noise_scale_at",
    "pairwise_abs_diff",
    "pl_log_prob",
    "relaxed_permutation",
    "straight_through_mask",
    "temperature_at",
    "topk_relaxed_mask",
]
