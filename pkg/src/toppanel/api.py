"""
Public API helpers for the toppanel package.

This module exposes the entry points behind every CLI verb: dataset preparation, training,
evaluation of a checkpoint, ablation, the two-stage baseline, subset-size sweeps and the gradient
check suite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import attr

from toppanel.baselines import mrmr_select, retrain_fixed_mask
from toppanel.checks import GRADCHECK_TOLERANCE, GradCheckResult, run_gradient_checks
from toppanel.config import ConfigValidationError, RunConfig
from toppanel.data import (
    GROUND_TRUTH_FILE,
    Dataset,
    binarize,
    generate_synthetic,
    hvg_filter,
    load_csv,
    read_ground_truth,
    split,
)
from toppanel.exceptions import CheckpointError, DataError
from toppanel.metrics import MetricRecord, summarize_seeds
from toppanel.model import Checkpoint, ModelConfig, ModelParams, load_checkpoint, save_checkpoint
from toppanel.training import TrainReport, evaluate, single_task_mode, train
from toppanel.utils.io import ensure_output_dir, write_json

logger = logging.getLogger(__name__)

CHECKPOINT_FILE: str = "checkpoint.json"
REPORT_FILE: str = "report.json"
SELECTED_FILE: str = "selected_features.txt"
SYNTHETIC_SOURCE: str = "synthetic"


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


def _attach_ground_truth(dataset: Dataset, truth_path: Path) -> Dataset:
    if not truth_path.exists():
        return dataset
    truth = read_ground_truth(truth_path)
    if any(index < 0 or index >= dataset.n_features for index in truth):
        raise DataError(
            f"Ground truth {truth_path} lists indices outside [0, {dataset.n_features})"
        )
    logger.info("Using ground truth %s (%d features)", truth_path, len(truth))
    return attr.evolve(dataset, ground_truth_features=truth)


def prepare_dataset(run_config: RunConfig, data_path: Path | None = None) -> Dataset:
    """
    Load or generate the dataset and apply preprocessing and the train/test split.

    Without `data_path` the dataset is generated from the ``synth`` section.
    """
    options = run_config.data
    if data_path is None:
        dataset = generate_synthetic(run_config.synth)
    else:
        dataset = load_csv(
            data_path,
            options.label_columns,
            regression_columns=options.regression_columns,
            label_prefix=options.label_prefix,
        )
        dataset = _attach_ground_truth(dataset, Path(data_path).with_name(GROUND_TRUTH_FILE))
    if options.hvg_top_m is not None and options.hvg_top_m < dataset.n_features:
        dataset = hvg_filter(dataset, options.hvg_top_m)
    if options.binarize:
        dataset = binarize(dataset, options.binarize_threshold)
    return split(dataset, options.split_seed, options.test_fraction)


def build_model_config(
    run_config: RunConfig, dataset: Dataset, task: str | None = None
) -> ModelConfig:
    """Model configuration for every task of `dataset`, or only for `task`."""
    tasks = dataset.task_specs()
    if not tasks:
        raise DataError("dataset has no label columns")
    model_config = run_config.model_config(tasks, dataset.n_features)
    if task is None:
        return model_config
    names = [spec.name for spec in tasks]
    if task not in names:
        raise DataError("unknown task", column=task)
    return single_task_mode(model_config, names.index(task))


# ---------------------------------------------------------------------------
# Training and evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainResult:
    """Outcome of one training run."""

    seed: int
    model_config: ModelConfig
    params: ModelParams
    report: TrainReport
    run_config: RunConfig

    def selected_names(self, dataset: Dataset) -> list[str]:
        """Selected feature names by decreasing final score."""
        return [dataset.feature_names[index] for index in self.report.ranked_indices]


def run_training(
    run_config: RunConfig,
    dataset: Dataset,
    *,
    task: str | None = None,
    fixed_indices: Sequence[int] | None = None,
) -> TrainResult:
    """Train one model with the seeds of `run_config`."""
    model_config = build_model_config(run_config, dataset, task)
    params, report = train(dataset, model_config, run_config.train, fixed_indices=fixed_indices)
    return TrainResult(
        seed=run_config.train.seed,
        model_config=model_config,
        params=params,
        report=report,
        run_config=run_config,
    )


def _provenance(run_config: RunConfig, dataset: Dataset, data_path: Path | None) -> dict[str, Any]:
    return {
        "config": run_config.to_dict(),
        "data_source": SYNTHETIC_SOURCE if data_path is None else str(data_path),
        "feature_names": list(dataset.feature_names),
        "split_seed": run_config.data.split_seed,
        "preprocessing": {
            "hvg_top_m": run_config.data.hvg_top_m,
            "binarize": run_config.data.binarize,
            "binarize_threshold": run_config.data.binarize_threshold,
        },
    }


def save_training(
    result: TrainResult,
    dataset: Dataset,
    out_dir: Path,
    data_path: Path | None = None,
) -> dict[str, Path]:
    """
    Write the checkpoint, the report JSON and the selected-features text file.

    The report carries the effective configuration; wall-clock timing sits in its ``timing``
    field only.
    """
    ensure_output_dir(out_dir)
    provenance = _provenance(result.run_config, dataset, data_path)
    checkpoint = save_checkpoint(
        out_dir / CHECKPOINT_FILE,
        result.model_config,
        result.params,
        {**provenance, "selected_indices": list(result.report.selected_indices)},
    )
    report = write_json(
        out_dir / REPORT_FILE,
        {
            "config": provenance["config"],
            "data_source": provenance["data_source"],
            "seed": result.seed,
            "tasks": [task.name for task in result.model_config.tasks],
            "selected_features": result.selected_names(dataset),
            **result.report.to_dict(),
        },
        kind="train_report",
    )
    selected = out_dir / SELECTED_FILE
    selected.write_text("".join(f"{name}\n" for name in result.selected_names(dataset)), "utf-8")
    return {"checkpoint": checkpoint, "report": report, "selected": selected}


def evaluate_checkpoint(
    checkpoint: Checkpoint, data_path: Path | None = None, *, source: str = "checkpoint"
) -> MetricRecord:
    """
    Evaluate a loaded checkpoint on the test split of its dataset.

    The dataset is prepared with the configuration stored in the checkpoint, which re-creates
    the same preprocessing and split. A checkpoint trained on a CSV file needs `data_path`;
    only synthetic runs are regenerated from their configuration.

    Raises
    ------
    CheckpointError
        If the checkpoint lacks provenance, was trained on a file and `data_path` is missing, or
        its feature names differ from the dataset's.
    """
    metadata = checkpoint.metadata
    if "config" not in metadata or "feature_names" not in metadata:
        raise CheckpointError("Checkpoint lacks run provenance", path=source)
    data_source = metadata.get("data_source", SYNTHETIC_SOURCE)
    if data_path is None and data_source != SYNTHETIC_SOURCE:
        raise CheckpointError(
            f"Checkpoint was trained on {data_source}; pass --data", path=source
        )
    try:
        run_config = RunConfig.from_dict(metadata["config"])
    except ConfigValidationError as exc:
        raise CheckpointError(f"Checkpoint configuration is invalid: {exc}", path=source) from exc
    dataset = prepare_dataset(run_config, data_path)
    if list(dataset.feature_names) != list(metadata["feature_names"]):
        raise CheckpointError("Dataset features differ from the checkpoint's", path=source)
    return evaluate(checkpoint.params, checkpoint.config, dataset)


def run_evaluation(checkpoint_path: Path, data_path: Path | None = None) -> MetricRecord:
    """Load the checkpoint at `checkpoint_path` and evaluate it with `evaluate_checkpoint`."""
    return evaluate_checkpoint(
        load_checkpoint(checkpoint_path), data_path, source=str(checkpoint_path)
    )


# ---------------------------------------------------------------------------
# Multi-seed experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeedRuns:
    """Final records of one setting over several seeds, with their aggregate."""

    label: str
    seeds: tuple[int, ...]
    records: tuple[MetricRecord, ...]
    selections: tuple[tuple[int, ...], ...] = ()
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def summary(self) -> dict[str, dict[str, Any]]:
        return summarize_seeds(self.records)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "seeds": list(self.seeds),
            "records": [record.to_dict() for record in self.records],
            "selections": [list(selection) for selection in self.selections],
            "summary": self.summary,
            **self.extra,
        }


def _final_record(result: TrainResult, dataset: Dataset) -> MetricRecord:
    record = result.report.final_record
    if record is None:
        record = evaluate(result.params, result.model_config, dataset)
    return record


def collect_runs(label: str, results: Sequence[TrainResult], dataset: Dataset) -> SeedRuns:
    """Final test records and selections of runs of one setting."""
    return SeedRuns(
        label=label,
        seeds=tuple(result.seed for result in results),
        records=tuple(_final_record(result, dataset) for result in results),
        selections=tuple(result.report.selected_indices for result in results),
    )


def _seed_runs(
    label: str,
    run_config: RunConfig,
    dataset: Dataset,
    seeds: Sequence[int],
    task: str | None = None,
) -> SeedRuns:
    results = [run_training(run_config.with_seed(seed), dataset, task=task) for seed in seeds]
    return collect_runs(label, results, dataset)


def run_ablation(run_config: RunConfig, dataset: Dataset, seeds: Sequence[int]) -> list[SeedRuns]:
    """
    Single-task runs for every task, then the multi-task run, over the same seeds.

    Every run goes through `run_training`, the path of the ``train`` command.
    """
    names = [spec.name for spec in dataset.task_specs()]
    rows = [_seed_runs(f"single:{name}", run_config, dataset, seeds, task=name) for name in names]
    rows.append(_seed_runs("multi", run_config, dataset, seeds))
    return rows


def run_baseline(
    run_config: RunConfig,
    dataset: Dataset,
    k: int | None,
    seeds: Sequence[int],
    task: str | None = None,
) -> SeedRuns:
    """
    Rank features by mRMR on the training rows of one task, then retrain on the top `k`.

    The ranking task is `task` or the first label column; the retrained model predicts every
    task (or only `task` when given).
    """
    panel_size = run_config.model.k_final if k is None else k
    configured = run_config.with_overrides({"model": {"k_final": panel_size}})
    column = dataset.labels[0] if task is None else dataset.label(task)
    rows = dataset.train_indices
    indices = mrmr_select(dataset.X[rows], column.values[rows], panel_size, kind=column.kind)
    logger.info("mRMR panel on %s: %s", column.name, indices)
    records = []
    for seed in seeds:
        seeded = configured.with_seed(seed)
        model_config = build_model_config(seeded, dataset, task)
        records.append(retrain_fixed_mask(dataset, indices, model_config, seeded.train))
    selection = tuple(sorted(indices))
    return SeedRuns(
        label=f"mrmr:{column.name}",
        seeds=tuple(seeds),
        records=tuple(records),
        selections=tuple(selection for _ in seeds),
        extra={"ranked_indices": list(indices)},
    )


def run_sweep(
    run_config: RunConfig, dataset: Dataset, sizes: Sequence[int], seeds: Sequence[int]
) -> list[SeedRuns]:
    """End-to-end training at several final panel sizes."""
    rows = []
    for size in sizes:
        sized = run_config.with_overrides({"model": {"k_final": size}})
        runs = _seed_runs(f"k={size}", sized, dataset, seeds)
        rows.append(
            SeedRuns(runs.label, runs.seeds, runs.records, runs.selections, {"k_final": size})
        )
    return rows


def run_gradcheck_suite(
    seed: int = 0, tolerance: float = GRADCHECK_TOLERANCE
) -> list[GradCheckResult]:
    return run_gradient_checks(seed, tolerance)
