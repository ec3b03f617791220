"""
Module: `toppanel.training.trainer`

Training loop joining the annealing schedules, the straight-through mask, the multi-task model
and Adam, plus held-out evaluation.

Classes
-------
TrainConfig
    Epochs, batch size, optimizer settings, seed and evaluation period.
TrainReport
    Evaluation records, selected panel, final scores and schedule traces of one run.

Functions
---------
train(dataset, model_config, train_config, fixed_indices=None) -> tuple[ModelParams, TrainReport]
evaluate(params, model_config, dataset, rows=None, mask=None) -> MetricRecord
eval_mask(params, model_config) -> SelectionMask
single_task_mode(model_config, task_index) -> ModelConfig
"""

from __future__ import annotations

import logging
import math
import time
from typing import Any, Sequence

import attr
import numpy as np

from toppanel.autodiff import Tape
from toppanel.data import Dataset
from toppanel.exceptions import ContractError, DataError, DimensionError, TrainingDivergenceError
from toppanel.metrics import MetricRecord, score_task, selection_recovery
from toppanel.model import (
    ModelConfig,
    ModelParams,
    as_input,
    forward,
    init_params,
    joint_loss,
)
from toppanel.selection import (
    SelectionMask,
    hard_topk,
    k_at,
    noise_scale_at,
    straight_through_mask,
    temperature_at,
)
from toppanel.training.optimizer import (
    DEFAULT_BETA1,
    DEFAULT_BETA2,
    DEFAULT_EPS,
    DEFAULT_LEARNING_RATE,
    AdamConfig,
    AdamState,
    adam_step,
)

logger = logging.getLogger(__name__)

DEFAULT_EPOCHS: int = 200
DEFAULT_BATCH_SIZE: int = 64
DEFAULT_EVAL_EVERY: int = 10


def _at_least_one(instance: object, attribute: "attr.Attribute[int]", value: int) -> None:
    if value < 1:
        raise ContractError(f"{attribute.name} must be >= 1, got {value}")


@attr.s(auto_attribs=True, frozen=True)
class TrainConfig:
    """
    Optimization settings of one run.

    Parameters
    ----------
    epochs : int
        Passes over the training rows.
    batch_size : int
        Rows per optimizer step; the last batch of an epoch may be smaller.
    learning_rate, adam_beta1, adam_beta2, adam_eps : float
        Adam settings.
    seed : int
        Seed of the batch shuffling and of the Gumbel noise.
    eval_every : int
        Evaluation period in epochs; the last epoch is always evaluated.
    """

    epochs: int = attr.ib(default=DEFAULT_EPOCHS, validator=_at_least_one)
    batch_size: int = attr.ib(default=DEFAULT_BATCH_SIZE, validator=_at_least_one)
    learning_rate: float = DEFAULT_LEARNING_RATE
    adam_beta1: float = DEFAULT_BETA1
    adam_beta2: float = DEFAULT_BETA2
    adam_eps: float = DEFAULT_EPS
    seed: int = 0
    eval_every: int = attr.ib(default=DEFAULT_EVAL_EVERY, validator=_at_least_one)

    def __attrs_post_init__(self) -> None:
        self.adam()

    def adam(self) -> AdamConfig:
        return AdamConfig(
            learning_rate=self.learning_rate,
            beta1=self.adam_beta1,
            beta2=self.adam_beta2,
            eps=self.adam_eps,
        )

    def steps_per_epoch(self, n_rows: int) -> int:
        return math.ceil(n_rows / self.batch_size)

    def to_dict(self) -> dict[str, Any]:
        return attr.asdict(self)


@attr.s(auto_attribs=True)
class TrainReport:
    """
    Outcome of one training run.

    Attributes
    ----------
    records : list[MetricRecord]
        Held-out metrics at every evaluation point.
    selected_indices : tuple[int, ...]
        The ``k_final`` features of largest final score, in increasing index order.
    ranked_indices : tuple[int, ...]
        The same features by decreasing final score.
    final_scores : tuple[float, ...]
        Snapshot of the score vector after the last step.
    tau_trace, k_trace, loss_trace : list
        Temperature, subset size and batch loss at every optimizer step.
    timing : dict[str, float]
        Wall-clock measurements, kept apart from the deterministic content.
    """

    records: list[MetricRecord] = attr.Factory(list)
    selected_indices: tuple[int, ...] = ()
    ranked_indices: tuple[int, ...] = ()
    final_scores: tuple[float, ...] = ()
    tau_trace: list[float] = attr.Factory(list)
    k_trace: list[int] = attr.Factory(list)
    loss_trace: list[float] = attr.Factory(list)
    timing: dict[str, float] = attr.Factory(dict)

    @property
    def final_record(self) -> MetricRecord | None:
        return self.records[-1] if self.records else None

    def to_dict(self, *, include_timing: bool = True) -> dict[str, Any]:
        document: dict[str, Any] = {
            "records": [record.to_dict() for record in self.records],
            "selected_indices": list(self.selected_indices),
            "ranked_indices": list(self.ranked_indices),
            "final_scores": list(self.final_scores),
            "traces": {
                "tau": list(self.tau_trace),
                "k": list(self.k_trace),
                "loss": list(self.loss_trace),
            },
        }
        if include_timing:
            document["timing"] = dict(self.timing)
        return document


def ranked_selection(scores: np.ndarray, k: int) -> list[int]:
    """Indices of the `k` largest scores by decreasing score; ties go to the lowest index."""
    order = np.lexsort((np.arange(scores.shape[0]), -scores))
    return [int(index) for index in order[:k]]


def eval_mask(params: ModelParams, model_config: ModelConfig) -> SelectionMask:
    """Deterministic evaluation mask: the ``k_final`` largest scores, no noise."""
    hard = hard_topk(params.scores.values, model_config.k_final)
    return SelectionMask.fixed(np.flatnonzero(hard), model_config.d)


def evaluate(
    params: ModelParams,
    model_config: ModelConfig,
    dataset: Dataset,
    rows: Sequence[int] | np.ndarray | None = None,
    mask: SelectionMask | None = None,
    *,
    step: int | None = None,
    epoch: int | None = None,
) -> MetricRecord:
    """
    Metrics of every task on `rows` (default: the test split) under `mask`.

    The default mask is `eval_mask`. Selection recovery is included when the dataset carries
    ground-truth informative features.
    """
    index = dataset.test_indices if rows is None else np.asarray(rows, dtype=np.int64)
    chosen = eval_mask(params, model_config) if mask is None else mask
    batch = dataset.batch(index)
    predictions = forward(as_input(batch.X), chosen, params, model_config)
    tasks = {
        task.name: score_task(task, predictions[task.name].values, batch.labels[task.name])
        for task in model_config.tasks
    }
    selection = None
    if dataset.ground_truth_features is not None:
        precision, recall = selection_recovery(chosen.indices, dataset.ground_truth_features)
        selection = {"precision": precision, "recall": recall}
    return MetricRecord(tasks=tasks, selection=selection, step=step, epoch=epoch)


def single_task_mode(model_config: ModelConfig, task_index: int) -> ModelConfig:
    """Same model restricted to task `task_index`."""
    if not 0 <= task_index < len(model_config.tasks):
        raise ContractError(
            f"task_index must be in [0, {len(model_config.tasks)}), got {task_index}"
        )
    return attr.evolve(model_config, tasks=(model_config.tasks[task_index],))


def _check_compatible(dataset: Dataset, model_config: ModelConfig) -> None:
    if dataset.n_features != model_config.d:
        raise DimensionError("train", (dataset.n_features,), (model_config.d,))
    available = {column.name: column for column in dataset.labels}
    for task in model_config.tasks:
        if task.name not in available:
            raise DataError("task has no label column", column=task.name)
        if available[task.name].kind != task.kind:
            raise DataError(
                f"task is {task.kind} but the label column is {available[task.name].kind}",
                column=task.name,
            )


def train(
    dataset: Dataset,
    model_config: ModelConfig,
    train_config: TrainConfig,
    fixed_indices: Sequence[int] | None = None,
) -> tuple[ModelParams, TrainReport]:
    """
    Train the selector and the multi-task model end to end.

    Every optimizer step anneals tau, k and the noise scale, draws a fresh straight-through mask
    for the batch and takes one Adam step on the joint loss. With `fixed_indices` the mask is
    frozen at those features and the scores are not trained.

    Trains on the train split (every row when the dataset has no split) and evaluates on the test
    split every ``eval_every`` epochs and after the last epoch.

    Raises
    ------
    DimensionError
        If the dataset width differs from ``model_config.d``.
    DataError
        If a task has no matching label column or there are no training rows.
    TrainingDivergenceError
        If the loss becomes non-finite.
    """
    _check_compatible(dataset, model_config)
    started = time.perf_counter()
    has_split = dataset.split_assignment is not None
    train_rows = dataset.train_indices if has_split else np.arange(dataset.n_samples)
    test_rows = dataset.test_indices if has_split else np.array([], dtype=np.int64)
    if train_rows.size == 0:
        raise DataError("no training rows")

    total_steps = train_config.epochs * train_config.steps_per_epoch(train_rows.size)
    temperature = model_config.schedule.temperature(total_steps)
    sparsity = model_config.schedule.sparsity(model_config.d, model_config.k_final, total_steps)

    params = init_params(model_config, np.random.default_rng(model_config.seed))
    shuffle_rng, noise_rng = np.random.default_rng(train_config.seed).spawn(2)
    frozen = None if fixed_indices is None else SelectionMask.fixed(fixed_indices, model_config.d)
    trainable = {
        name: tensor
        for name, tensor in params.named_tensors()
        if not (frozen is not None and name == "scores")
    }
    adam = train_config.adam()
    state = AdamState()
    report = TrainReport()

    step = 0
    for epoch in range(1, train_config.epochs + 1):
        order = shuffle_rng.permutation(train_rows)
        for start in range(0, order.size, train_config.batch_size):
            batch = dataset.batch(order[start : start + train_config.batch_size])
            if frozen is None:
                tau = temperature_at(temperature, step)
                k = k_at(sparsity, step)
                noise = noise_scale_at(temperature, model_config.noise_scale0, step)
            else:
                tau, k, noise = float("nan"), frozen.k, 0.0
            with Tape() as tape:
                if frozen is None:
                    mask = straight_through_mask(
                        params.scores, tau, k, rng=noise_rng, noise_scale=noise
                    )
                else:
                    mask = frozen
                loss = joint_loss(batch, params, model_config, mask)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingDivergenceError(step, tau, k)
            params.zero_grad()
            if loss.requires_grad:
                tape.backward(loss)
            adam_step(
                trainable, {name: tensor.grad for name, tensor in trainable.items()}, state, adam
            )
            if frozen is None:
                report.tau_trace.append(tau)
            report.k_trace.append(k)
            report.loss_trace.append(value)
            logger.debug("step %d: tau=%.4g k=%d loss=%.6g", step, tau, k, value)
            step += 1

        if test_rows.size and (
            epoch % train_config.eval_every == 0 or epoch == train_config.epochs
        ):
            record = evaluate(
                params, model_config, dataset, test_rows, frozen, step=step, epoch=epoch
            )
            report.records.append(record)
            logger.info("epoch %d/%d: %s", epoch, train_config.epochs, _headline(record))

    scores = params.scores.values
    ranked = (
        ranked_selection(scores, model_config.k_final) if frozen is None else list(frozen.indices)
    )
    report.ranked_indices = tuple(ranked)
    report.selected_indices = tuple(sorted(ranked))
    report.final_scores = tuple(float(value) for value in scores)
    report.timing = {"train_seconds": time.perf_counter() - started}
    return params, report


def _headline(record: MetricRecord) -> str:
    parts = []
    for task, metrics in record.tasks.items():
        shown = metrics.get("f1_macro", metrics.get("mse"))
        parts.append(f"{task}={shown:.4f}" if shown is not None else task)
    return ", ".join(parts)

