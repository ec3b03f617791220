"""
Module: `toppanel.checks`

Finite-difference verification of every differentiable operation and of the end-to-end model.

Each check evaluates a random linear projection of an operation's output, so every gradient
coordinate is exercised. Points are drawn away from the kinks of ``relu`` and ``abs``.

Classes
-------
GradCheckResult
    Name, maximum relative error and verdict of one check.

Functions
---------
gradient_checks(seed) -> list[tuple[str, ScalarFunction, Tensor]]
run_gradient_checks(seed, tolerance) -> list[GradCheckResult]
"""

from __future__ import annotations

import logging
from typing import Callable

import attr
import numpy as np

from toppanel.autodiff import (
    Tensor,
    absolute,
    add,
    constant,
    grad_check,
    log_softmax_rows,
    matmul,
    mul,
    neg,
    reduce,
    relu,
    reshape,
    scale,
    softmax_rows,
    sub,
)
from toppanel.model import (
    Batch,
    ModelConfig,
    ModelParams,
    TaskSpec,
    init_params,
    joint_loss,
    task_loss,
)
from toppanel.selection import (
    ScheduleConfig,
    pairwise_abs_diff,
    relaxed_permutation,
    straight_through_mask,
    topk_relaxed_mask,
)

logger = logging.getLogger(__name__)

GRADCHECK_TOLERANCE: float = 1e-4
ScalarFunction = Callable[[Tensor], Tensor]


@attr.s(auto_attribs=True, frozen=True)
class GradCheckResult:
    name: str
    max_relative_error: float
    passed: bool

    def to_dict(self) -> dict[str, object]:
        return attr.asdict(self)


def _direction(rng: np.random.Generator, shape: tuple[int, ...]) -> Tensor:
    return constant(rng.standard_normal(shape))


def _linear(op: ScalarFunction, weights: Tensor) -> ScalarFunction:
    """``x -> sum(weights * op(x))``."""
    return lambda x: reduce("sum", mul(op(x), weights))


def _away_from_zero(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.choice([-1.0, 1.0], size=shape) * rng.uniform(0.2, 1.0, size=shape)


def _pipeline(rng: np.random.Generator) -> tuple[ModelConfig, ModelParams, Batch]:
    d, n = 6, 8
    config = ModelConfig(
        d=d,
        k_final=3,
        tasks=(TaskSpec.classification("y_cls", 3), TaskSpec.regression("y_reg")),
        encoder_layers=(),
        latent_dim=4,
        schedule=ScheduleConfig(),
        noise_scale0=0.0,
    )
    params = init_params(config, rng)
    classes = rng.integers(0, 3, size=n)
    classes[0] = -1
    targets = rng.standard_normal(n)
    targets[1] = np.nan
    batch = Batch(X=rng.standard_normal((n, d)), labels={"y_cls": classes, "y_reg": targets})
    return config, params, batch


def gradient_checks(seed: int = 0) -> list[tuple[str, ScalarFunction, Tensor]]:
    """Named scalar functions and evaluation points covering every differentiable operation."""
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((4, 5))
    right = constant(rng.standard_normal((5, 3)))
    other = constant(rng.standard_normal((4, 5)))
    row = constant(rng.standard_normal(5))
    scores = rng.uniform(-0.5, 0.5, size=6)

    checks: list[tuple[str, ScalarFunction, Tensor]] = [
        ("matmul", _linear(lambda x: matmul(x, right), _direction(rng, (4, 3))), Tensor(matrix)),
        ("softmax_rows", _linear(softmax_rows, _direction(rng, (4, 5))), Tensor(matrix)),
        ("log_softmax_rows", _linear(log_softmax_rows, _direction(rng, (4, 5))), Tensor(matrix)),
        ("add", _linear(lambda x: add(x, row), _direction(rng, (4, 5))), Tensor(matrix)),
        ("sub", _linear(lambda x: sub(other, x), _direction(rng, (4, 5))), Tensor(matrix)),
        ("mul", _linear(lambda x: mul(x, other), _direction(rng, (4, 5))), Tensor(matrix)),
        (
            "mul_row_broadcast",
            _linear(lambda x: mul(other, x), _direction(rng, (4, 5))),
            Tensor(rng.standard_normal(5)),
        ),
        ("relu", _linear(relu, _direction(rng, (4, 5))), Tensor(_away_from_zero(rng, (4, 5)))),
        ("abs", _linear(absolute, _direction(rng, (4, 5))), Tensor(_away_from_zero(rng, (4, 5)))),
        ("neg", _linear(neg, _direction(rng, (4, 5))), Tensor(matrix)),
        ("scale", _linear(lambda x: scale(x, 2.5), _direction(rng, (4, 5))), Tensor(matrix)),
        (
            "reduce_sum_axis0",
            _linear(lambda x: reduce("sum", x, axis=0), _direction(rng, (5,))),
            Tensor(matrix),
        ),
        (
            "reduce_mean_axis1",
            _linear(lambda x: reduce("mean", x, axis=1), _direction(rng, (4,))),
            Tensor(matrix),
        ),
        ("reshape", _linear(lambda x: reshape(x, (5, 4)), _direction(rng, (5, 4))), Tensor(matrix)),
        ("pairwise_abs_diff", _linear(pairwise_abs_diff, _direction(rng, (6, 6))), Tensor(scores)),
        (
            "relaxed_permutation",
            _linear(lambda s: relaxed_permutation(s, 1.0).pi, _direction(rng, (6, 6))),
            Tensor(scores),
        ),
        (
            "topk_relaxed_mask",
            _linear(
                lambda s: topk_relaxed_mask(relaxed_permutation(s, 1.0), 3), _direction(rng, (6,))
            ),
            Tensor(scores),
        ),
    ]

    labels = rng.integers(0, 3, size=4)
    labels[2] = -1
    classification = TaskSpec.classification("y_cls", 3)
    checks.append(
        (
            "cross_entropy",
            lambda x: task_loss(x, labels, classification),
            Tensor(rng.standard_normal((4, 3))),
        )
    )
    targets = rng.standard_normal(4)
    targets[0] = np.nan
    regression = TaskSpec.regression("y_reg")
    checks.append(
        (
            "squared_error",
            lambda x: task_loss(x, targets, regression),
            Tensor(rng.standard_normal((4, 1))),
        )
    )

    config, params, batch = _pipeline(rng)

    def through_scores(s: Tensor) -> Tensor:
        mask = straight_through_mask(s, 1.0, config.k_final)
        local = ModelParams(scores=s, encoder=params.encoder, heads=params.heads)
        return joint_loss(batch, local, config, mask, relaxed=True)

    fixed_mask_scores = params.scores

    def through_encoder(weight: Tensor) -> Tensor:
        mask = straight_through_mask(fixed_mask_scores, 1.0, config.k_final)
        local = ModelParams(
            scores=fixed_mask_scores,
            encoder=[(weight, params.encoder[0][1])],
            heads=params.heads,
        )
        return joint_loss(batch, local, config, mask)

    checks.append(("pipeline_scores_relaxed", through_scores, Tensor(scores)))
    checks.append(
        ("pipeline_encoder_straight_through", through_encoder, Tensor(params.encoder[0][0].values))
    )
    return checks


def run_gradient_checks(
    seed: int = 0, tolerance: float = GRADCHECK_TOLERANCE
) -> list[GradCheckResult]:
    """Run every check of `gradient_checks`; a check passes below `tolerance`."""
    results = []
    for name, function, point in gradient_checks(seed):
        error = grad_check(function, point)
        results.append(GradCheckResult(name=name, max_relative_error=error, passed=error < tolerance))
        logger.debug("gradcheck %s: %.3e", name, error)
    return results
