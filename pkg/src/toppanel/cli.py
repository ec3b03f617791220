"""
Module: `toppanel.cli`

Defines the command-line interface for the toppanel package.

This module declares command-line commands using the `typer` library. Every command is
deterministic given its seeds, writes JSON outputs carrying a ``schema_version`` field and exits
with a nonzero code on any error.

Commands
--------
synth
    Generate a synthetic dataset CSV with its ground-truth sidecar.
train
    Train the selector and model; write checkpoint, report and selected features.
eval
    Evaluate a checkpoint on the test split of its dataset.
ablate
    Single-task runs per task against the multi-task run.
baseline
    mRMR ranking followed by fixed-mask retraining.
sweep
    End-to-end training over several final panel sizes.
gradcheck
    Finite-difference verification of every differentiable operation.
info
    Package version and platform.

See Also
--------
typer. https://typer.tiangolo.com/
    Library for building command-line interfaces with Python.
rich. https://rich.readthedocs.io/
    Console tables and the log handler.

Notes
-----
In the `Typer` constructor, `add_completion=False` disables automatic installation of shell
completion support (e.g., Bash, Zsh) to keep the CLI interface minimal.
"""

from __future__ import annotations

import io
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Sequence

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from toppanel import __version__
from toppanel import info as pkg_info
from toppanel.api import (
    SeedRuns,
    collect_runs,
    evaluate_checkpoint,
    prepare_dataset,
    run_ablation,
    run_baseline,
    run_gradcheck_suite,
    run_sweep,
    run_training,
    save_training,
)
from toppanel.config import ConfigValidationError, RunConfig
from toppanel.data import GROUND_TRUTH_FILE, generate_synthetic, write_csv, write_ground_truth
from toppanel.exceptions import ToppanelError
from toppanel.model import load_checkpoint
from toppanel.utils.io import ensure_output_dir, load_yaml_config, write_json

app = typer.Typer(add_completion=False, no_args_is_help=True)
console = Console()
err_console = Console(stderr=True)

DATASET_FILE: str = "dataset.csv"

ConfigOption = typer.Option(None, "--config", "-c", help="YAML run configuration file.")
DataOption = typer.Option(
    None, "--data", "-d", help="Dataset CSV. Defaults to the configured synthetic dataset."
)
SeedOption = typer.Option(None, "--seed", help="Seed of initialisation and training.")
SeedsOption = typer.Option(None, "--seeds", help="Comma-separated seeds, e.g. 0,1,2.")
KOption = typer.Option(None, "--k", help="Final panel size (overrides model.k_final).")
EpochsOption = typer.Option(None, "--epochs", help="Training epochs (overrides train.epochs).")
TaskOption = typer.Option(None, "--task", help="Restrict training to one label column.")
VerboseOption = typer.Option(False, "--verbose", help="Log every optimizer step.")


def _configure_logging(verbose: bool) -> None:
    logger = logging.getLogger("toppanel")
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    logger.addHandler(RichHandler(console=err_console, show_path=False))
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)


@contextmanager
def _handled() -> Iterator[None]:
    """Turn package errors into a red message and the error's exit code."""
    try:
        yield
    except (ToppanelError, ConfigValidationError) as exc:
        err_console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(code=getattr(exc, "exit_code", 1)) from exc


def _parse_ints(text: str, option: str) -> list[int]:
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise typer.BadParameter(f"{option} expects comma-separated integers, got {text!r}") from exc
    if not values:
        raise typer.BadParameter(f"{option} expects at least one integer")
    return values


def _load_run_config(
    config_path: Path | None, *, k: int | None = None, epochs: int | None = None
) -> RunConfig:
    run_config = RunConfig.from_dict(load_yaml_config(config_path) if config_path else {})
    overrides: dict[str, Any] = {}
    if k is not None:
        overrides["model"] = {"k_final": k}
    if epochs is not None:
        overrides["train"] = {"epochs": epochs}
    return run_config.with_overrides(overrides)


def _seed_list(run_config: RunConfig, seed: int | None, seeds: str | None) -> list[int]:
    if seeds is not None:
        return _parse_ints(seeds, "--seeds")
    return [run_config.train.seed if seed is None else seed]


def _format(value: Any) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _summary_table(title: str, runs: Sequence[SeedRuns]) -> Table:
    table = Table(title=title)
    for column in ("Setting", "Metric", "Mean", "Std", "Runs"):
        table.add_column(column, justify="left" if column in ("Setting", "Metric") else "right")
    for row in runs:
        for metric, stats in row.summary.items():
            table.add_row(
                row.label,
                metric,
                _format(stats["mean"]),
                _format(stats["std"]),
                f"{stats['n']}/{stats['n'] + stats['n_nan']}",
            )
    return table


def _emit_table(table: Table, text_path: Path | None = None) -> None:
    console.print(table)
    if text_path is not None:
        recorder = Console(record=True, width=120, file=io.StringIO())
        recorder.print(table)
        text_path.write_text(recorder.export_text(), encoding="utf-8")


@app.callback()
def main_callback(
    version: bool = typer.Option(
        False, "--version", "-v", help="Show the package version and exit."
    )
) -> None:
    if version:
        typer.echo(__version__)
        raise typer.Exit()


@app.command("info")
def cli_info() -> None:
    """Display package version and platform information."""
    typer.echo(pkg_info())


@app.command()
def synth(
    out: Path = typer.Option(..., "--out", "-o", help="Output directory."),
    config_path: Path | None = ConfigOption,
    samples: int | None = typer.Option(None, "--samples", help="Number of rows N."),
    features: int | None = typer.Option(None, "--features", help="Number of features d."),
    informative: int | None = typer.Option(
        None, "--informative", help="Informative features per task g."
    ),
    noise: float | None = typer.Option(None, "--noise", help="Label noise sigma."),
    nonlinearity: str | None = typer.Option(
        None, "--nonlinearity", help="'linear' or 'xor-pairs'."
    ),
    seed: int | None = SeedOption,
    verbose: bool = VerboseOption,
) -> None:
    """
    Generate a synthetic dataset: ``dataset.csv``, ``ground_truth.json`` (JSON list of the
    informative feature indices) and ``synth.json`` (the generating recipe).
    """
    _configure_logging(verbose)
    with _handled():
        flags = {
            "n_samples": samples,
            "n_features": features,
            "n_informative": informative,
            "noise_sigma": noise,
            "nonlinearity": nonlinearity,
            "seed": seed,
        }
        run_config = _load_run_config(config_path).with_overrides(
            {"synth": {key: value for key, value in flags.items() if value is not None}}
        )
        dataset = generate_synthetic(run_config.synth)
        ensure_output_dir(out)
        csv_path = write_csv(dataset, out / DATASET_FILE)
        truth_path = write_ground_truth(out / GROUND_TRUTH_FILE, dataset.ground_truth_features or ())
        write_json(
            out / "synth.json",
            {
                "config": run_config.to_dict(),
                "dataset": DATASET_FILE,
                "ground_truth": GROUND_TRUTH_FILE,
                "task_ground_truth": {
                    name: list(columns)
                    for name, columns in (dataset.task_ground_truth or {}).items()
                },
            },
            kind="synth",
        )
    typer.echo(f"[SUCCESS] Generated {csv_path} and {truth_path}")


@app.command()
def train(
    out: Path = typer.Option(..., "--out", "-o", help="Output directory."),
    config_path: Path | None = ConfigOption,
    data: Path | None = DataOption,
    seed: int | None = SeedOption,
    seeds: str | None = SeedsOption,
    k: int | None = KOption,
    epochs: int | None = EpochsOption,
    task: str | None = TaskOption,
    verbose: bool = VerboseOption,
) -> None:
    """
    Train the selector and the multi-task model.

    Writes ``checkpoint.json``, ``report.json`` and ``selected_features.txt`` (one feature name per
    line by decreasing final score). With several ``--seeds`` each run goes to ``seed_<s>/`` and
    ``summary.json`` holds the mean and standard deviation of the final test metrics.
    """
    _configure_logging(verbose)
    with _handled():
        run_config = _load_run_config(config_path, k=k, epochs=epochs)
        seed_values = _seed_list(run_config, seed, seeds)
        dataset = prepare_dataset(run_config, data)
        if len(seed_values) == 1:
            result = run_training(run_config.with_seed(seed_values[0]), dataset, task=task)
            paths = save_training(result, dataset, out, data)
            typer.echo(f"[SUCCESS] Wrote {paths['checkpoint']}, {paths['report']}, {paths['selected']}")
            return
        results = []
        for value in seed_values:
            result = run_training(run_config.with_seed(value), dataset, task=task)
            save_training(result, dataset, out / f"seed_{value}", data)
            results.append(result)
        runs = collect_runs("train" if task is None else f"train:{task}", results, dataset)
        write_json(
            out / "summary.json",
            {"config": run_config.to_dict(), "runs": runs.to_dict()},
            kind="train_summary",
        )
        _emit_table(_summary_table("Training across seeds", [runs]))
    typer.echo(f"[SUCCESS] Wrote {len(seed_values)} runs and {out / 'summary.json'}")


@app.command("eval")
def cli_eval(
    checkpoint: Path = typer.Option(..., "--checkpoint", help="Checkpoint written by 'train'."),
    data: Path | None = DataOption,
    out: Path | None = typer.Option(None, "--out", "-o", help="Metrics JSON path."),
    verbose: bool = VerboseOption,
) -> None:
    """Evaluate a checkpoint on the test split of its dataset and write or print metrics JSON."""
    _configure_logging(verbose)
    with _handled():
        loaded = load_checkpoint(checkpoint)
        record = evaluate_checkpoint(loaded, data, source=str(checkpoint))
        payload = {
            "checkpoint": str(checkpoint),
            "config": loaded.metadata["config"],
            "metrics": record.to_dict(),
        }
        if out is None:
            console.print_json(data={"schema_version": 1, "kind": "metrics", **payload})
            return
        write_json(out, payload, kind="metrics")
    typer.echo(f"[SUCCESS] Wrote {out}")


@app.command()
def ablate(
    out: Path = typer.Option(..., "--out", "-o", help="Output directory."),
    config_path: Path | None = ConfigOption,
    data: Path | None = DataOption,
    seed: int | None = SeedOption,
    seeds: str | None = SeedsOption,
    k: int | None = KOption,
    epochs: int | None = EpochsOption,
    verbose: bool = VerboseOption,
) -> None:
    """Compare single-task training on each task with multi-task training (JSON and text table)."""
    _configure_logging(verbose)
    with _handled():
        run_config = _load_run_config(config_path, k=k, epochs=epochs)
        seed_values = _seed_list(run_config, seed, seeds)
        dataset = prepare_dataset(run_config, data)
        rows = run_ablation(run_config, dataset, seed_values)
        ensure_output_dir(out)
        write_json(
            out / "ablation.json",
            {"config": run_config.to_dict(), "rows": [row.to_dict() for row in rows]},
            kind="ablation",
        )
        _emit_table(_summary_table("Single-task vs multi-task", rows), out / "ablation.txt")
    typer.echo(f"[SUCCESS] Wrote {out / 'ablation.json'}")


@app.command()
def baseline(
    out: Path = typer.Option(..., "--out", "-o", help="Output directory."),
    config_path: Path | None = ConfigOption,
    data: Path | None = DataOption,
    seed: int | None = SeedOption,
    seeds: str | None = SeedsOption,
    k: int | None = KOption,
    epochs: int | None = EpochsOption,
    task: str | None = TaskOption,
    verbose: bool = VerboseOption,
) -> None:
    """Rank features with mRMR on the training rows, then retrain on the top k with a frozen mask."""
    _configure_logging(verbose)
    with _handled():
        run_config = _load_run_config(config_path, epochs=epochs)
        seed_values = _seed_list(run_config, seed, seeds)
        dataset = prepare_dataset(run_config, data)
        runs = run_baseline(run_config, dataset, k, seed_values, task)
        ensure_output_dir(out)
        write_json(
            out / "baseline.json",
            {"config": run_config.to_dict(), "runs": runs.to_dict()},
            kind="baseline",
        )
        _emit_table(_summary_table("mRMR baseline", [runs]))
    typer.echo(f"[SUCCESS] Wrote {out / 'baseline.json'}")


@app.command()
def sweep(
    out: Path = typer.Option(..., "--out", "-o", help="Output directory."),
    sizes: str = typer.Option(..., "--sizes", help="Comma-separated panel sizes, e.g. 4,8,16."),
    config_path: Path | None = ConfigOption,
    data: Path | None = DataOption,
    seed: int | None = SeedOption,
    seeds: str | None = SeedsOption,
    epochs: int | None = EpochsOption,
    verbose: bool = VerboseOption,
) -> None:
    """Train end to end at every panel size and tabulate the final test metrics."""
    _configure_logging(verbose)
    with _handled():
        run_config = _load_run_config(config_path, epochs=epochs)
        seed_values = _seed_list(run_config, seed, seeds)
        dataset = prepare_dataset(run_config, data)
        rows = run_sweep(run_config, dataset, _parse_ints(sizes, "--sizes"), seed_values)
        ensure_output_dir(out)
        write_json(
            out / "sweep.json",
            {"config": run_config.to_dict(), "rows": [row.to_dict() for row in rows]},
            kind="sweep",
        )
        _emit_table(_summary_table("Panel size sweep", rows), out / "sweep.txt")
    typer.echo(f"[SUCCESS] Wrote {out / 'sweep.json'}")


@app.command()
def gradcheck(
    out: Path | None = typer.Option(None, "--out", "-o", help="Optional results JSON path."),
    seed: int = typer.Option(0, "--seed", help="Seed of the evaluation points."),
    verbose: bool = VerboseOption,
) -> None:
    """Check every gradient against central finite differences; exit 0 only if all pass."""
    _configure_logging(verbose)
    with _handled():
        results = run_gradcheck_suite(seed)
        table = Table(title="Gradient checks")
        table.add_column("Check")
        table.add_column("Max relative error", justify="right")
        table.add_column("Status")
        for result in results:
            status = "[green]pass[/green]" if result.passed else "[red]FAIL[/red]"
            table.add_row(result.name, f"{result.max_relative_error:.3e}", status)
        console.print(table)
        if out is not None:
            write_json(out, {"checks": [result.to_dict() for result in results]}, kind="gradcheck")
    failed = [result.name for result in results if not result.passed]
    if failed:
        err_console.print(f"[red]Failed:[/red] {', '.join(failed)}")
        raise typer.Exit(code=1)
