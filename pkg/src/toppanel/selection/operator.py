"""
Module: `toppanel.selection.operator`

Relaxed sorting of learnable feature scores and the straight-through top-k selection mask.

The relaxed permutation of a score vector ``s`` of length ``d`` has rows

    pi[m, :] = softmax(((d + 1 - 2m) * s - A_s @ 1) / tau),    m = 1..d

where ``A_s[i, j] = |s_i - s_j|``. Row ``m`` concentrates on the m-th largest score as
``tau -> 0``. Summing the first ``k`` rows yields a relaxed top-k indicator; the straight-through
mask uses the exact top-k indicator as forward value and the relaxed one for gradients.

Classes
-------
RelaxedPermutation
SelectionMask

Functions
---------
pairwise_abs_diff(s) -> Tensor
relaxed_permutation(s, tau) -> RelaxedPermutation
gumbel_perturb(s, rng, scale) -> Tensor
topk_relaxed_mask(pi, k) -> Tensor
hard_topk(values, k) -> NDArray
straight_through_mask(s, tau, k, rng, noise_scale) -> SelectionMask
pl_log_prob(s, ranking) -> float
"""

from __future__ import annotations

from typing import Sequence

import attr
import numpy as np
from numpy.typing import ArrayLike, NDArray

from toppanel.autodiff import (
    Tensor,
    absolute,
    add,
    constant,
    matmul,
    reduce,
    reshape,
    scale,
    softmax_rows,
    stop_gradient,
    sub,
)
from toppanel.exceptions import ContractError, DimensionError

ScoreVector = Tensor
"""Learnable per-feature scores: a 1-D tensor of length d with ``requires_grad=True``."""


@attr.s(auto_attribs=True, frozen=True)
class RelaxedPermutation:
    """Row-stochastic d×d relaxation of the descending sort permutation."""

    pi: Tensor
    tau: float

    @property
    def d(self) -> int:
        return self.pi.shape[0]


@attr.s(auto_attribs=True, frozen=True, eq=False)
class SelectionMask:
    """
    Top-k selection over d features.

    Attributes
    ----------
    hard : NDArray[np.float64]
        Exact 0/1 indicator of the k selected features.
    relaxed : Tensor
        Relaxed indicator (sum of the first k rows of the relaxed permutation).
    k : int
        Number of selected features.
    value : Tensor
        Forward value equal to `hard`; its gradient is the gradient of `relaxed`.
    """

    hard: NDArray[np.float64]
    relaxed: Tensor
    k: int
    value: Tensor

    @property
    def d(self) -> int:
        return int(self.hard.shape[0])

    @property
    def indices(self) -> list[int]:
        """Selected feature indices in increasing order."""
        return [int(i) for i in np.flatnonzero(self.hard)]

    @classmethod
    def fixed(cls, indices: Sequence[int], d: int) -> "SelectionMask":
        """Frozen mask over the given indices: no score and no gradient path."""
        hard = np.zeros(d, dtype=np.float64)
        chosen = sorted(set(int(i) for i in indices))
        if not chosen or chosen[0] < 0 or chosen[-1] >= d:
            raise ContractError(f"fixed mask indices must be non-empty and within [0, {d})")
        hard[chosen] = 1.0
        frozen = constant(hard)
        return cls(hard=hard, relaxed=frozen, k=len(chosen), value=frozen)


def _check_scores(s: Tensor) -> int:
    if s.ndim != 1 or s.shape[0] < 1:
        raise DimensionError("scores", s.shape)
    return s.shape[0]


def pairwise_abs_diff(s: ScoreVector) -> Tensor:
    """Matrix ``A[m, n] = |s_m - s_n|`` (symmetric, zero diagonal)."""
    d = _check_scores(s)
    ones_row = constant(np.ones((1, d)))
    ones_col = constant(np.ones((d, 1)))
    by_row = matmul(reshape(s, (d, 1)), ones_row)
    by_col = matmul(ones_col, reshape(s, (1, d)))
    return absolute(sub(by_row, by_col))


def relaxed_permutation(s: ScoreVector, tau: float) -> RelaxedPermutation:
    """
    Relaxed permutation sorting `s` in descending order.

    Raises
    ------
    ContractError
        If ``tau <= 0``.
    """
    if not tau > 0:
        raise ContractError(f"tau must be positive, got {tau}")
    d = _check_scores(s)
    row_spread = reduce("sum", pairwise_abs_diff(s), axis=1)
    coefficients = constant((d + 1 - 2 * np.arange(1, d + 1, dtype=np.float64)).reshape(d, 1))
    logits = sub(matmul(coefficients, reshape(s, (1, d))), row_spread)
    return RelaxedPermutation(pi=softmax_rows(scale(logits, 1.0 / tau)), tau=float(tau))


def gumbel_perturb(s: ScoreVector, rng: np.random.Generator, scale_by: float) -> Tensor:
    """
    Add ``scale_by * g`` with ``g ~ Gumbel(0, 1)`` drawn from `rng`.

    The noise is a constant: gradients reach `s` unchanged. ``scale_by == 0`` returns `s` itself.
    """
    if scale_by < 0:
        raise ContractError(f"noise scale must be non-negative, got {scale_by}")
    if scale_by == 0:
        return s
    noise = rng.gumbel(loc=0.0, scale=1.0, size=s.shape)
    return add(s, constant(scale_by * noise))


def topk_relaxed_mask(pi: RelaxedPermutation, k: int) -> Tensor:
    """Sum of the first `k` rows of the relaxed permutation (length-d tensor)."""
    d = pi.d
    if not 1 <= k <= d:
        raise ContractError(f"k must be in [1, {d}], got {k}")
    selector = np.zeros((1, d))
    selector[0, :k] = 1.0
    return reshape(matmul(constant(selector), pi.pi), (d,))


def hard_topk(values: ArrayLike, k: int) -> NDArray[np.float64]:
    """0/1 indicator of the `k` largest entries; ties go to the lowest index."""
    values = np.asarray(values, dtype=np.float64)
    d = values.shape[0]
    if not 1 <= k <= d:
        raise ContractError(f"k must be in [1, {d}], got {k}")
    order = np.lexsort((np.arange(d), -values))
    hard = np.zeros(d, dtype=np.float64)
    hard[order[:k]] = 1.0
    return hard


def straight_through_mask(
    s: ScoreVector,
    tau: float,
    k: int,
    rng: np.random.Generator | None = None,
    noise_scale: float = 0.0,
) -> SelectionMask:
    """
    Straight-through top-k mask.

    Scores are optionally perturbed with Gumbel noise; the same perturbed scores feed the exact
    top-k indicator and the relaxed mask. The forward value is
    ``hard + (relaxed - stop_gradient(relaxed))``, which equals `hard` exactly while its gradient
    with respect to `s` is the gradient of `relaxed`.
    """
    d = _check_scores(s)
    if not 1 <= k <= d:
        raise ContractError(f"k must be in [1, {d}], got {k}")
    if not tau > 0:
        raise ContractError(f"tau must be positive, got {tau}")
    perturbed = s if rng is None else gumbel_perturb(s, rng, noise_scale)
    hard = hard_topk(perturbed.values, k)
    relaxed = topk_relaxed_mask(relaxed_permutation(perturbed, tau), k)
    value = add(constant(hard), sub(relaxed, stop_gradient(relaxed)))
    return SelectionMask(hard=hard, relaxed=relaxed, k=k, value=value)


def pl_log_prob(s: ScoreVector | ArrayLike, ranking: Sequence[int]) -> float:
    """
    Plackett-Luce log-likelihood of `ranking` under weights ``exp(s)``.

    ``log P = sum_m [s[r_m] - log sum_{j not yet ranked} exp(s[j])]``.

    Raises
    ------
    ContractError
        If `ranking` is not a permutation of ``0..d-1``.
    """
    scores = s.values if isinstance(s, Tensor) else np.asarray(s, dtype=np.float64)
    d = scores.shape[0]
    order = np.asarray(ranking, dtype=np.int64)
    if order.shape != (d,) or not np.array_equal(np.sort(order), np.arange(d)):
        raise ContractError(f"ranking must be a permutation of 0..{d - 1}, got {list(ranking)}")
    ranked = scores[order]
    # suffix[m] = log sum_{j >= m} exp(ranked[j])
    suffix = np.logaddexp.accumulate(ranked[::-1])[::-1]
    return float(np.sum(ranked - suffix))
