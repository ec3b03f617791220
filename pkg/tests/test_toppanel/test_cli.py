"""
Module: `test_toppanel.test_cli`

Test suite for the CLI interface of the toppanel package.

See Also
--------
toppanel.cli:
    Module under test.
typer.testing.CliRunner:
    Utility for testing command-line interfaces built with Typer.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from toppanel import __version__
from toppanel.cli import app

runner = CliRunner()

TINY_YAML = """\
model:
  encoder_layers: [4]
  latent_dim: 3
  k_final: 2
train:
  epochs: 2
  batch_size: 16
  learning_rate: 0.01
synth:
  n_samples: 60
  n_features: 8
  n_informative: 2
  tasks:
    - {name: y_a, num_classes: 3}
    - {name: y_b, missing_rate: 0.5}
"""


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / "run.yaml"
    path.write_text(TINY_YAML, encoding="utf-8")
    return path


def _read(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def test_cli_help():
    """
    Test that the CLI responds correctly to the `--help` command.
    """
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    assert "Usage" in result.stdout
    for command in ("synth", "train", "eval", "ablate", "baseline", "sweep", "gradcheck"):
        assert command in result.stdout


def test_cli_version():
    result = runner.invoke(app, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_cli_info():
    result = runner.invoke(app, ["info"])
    assert result.exit_code == 0
    assert "toppanel" in result.stdout


def test_cli_synth(tmp_path: Path, config_file: Path):
    """
    Test that `synth` writes the dataset, its ground truth and the recipe.
    """
    out = tmp_path / "synth"
    result = runner.invoke(app, ["synth", "--out", str(out), "--config", str(config_file), "--seed", "3"])
    assert result.exit_code == 0, result.output
    assert "[SUCCESS]" in result.stdout
    header = (out / "dataset.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",")[-2:] == ["y_a", "y_b"]
    assert len(json.loads((out / "ground_truth.json").read_text(encoding="utf-8"))) == 2
    recipe = _read(out / "synth.json")
    assert recipe["schema_version"] == 1
    assert recipe["config"]["synth"]["seed"] == 3


def test_cli_train_and_eval(tmp_path: Path, config_file: Path):
    """
    Test that `train` writes its outputs and `eval` reproduces the final metrics.
    """
    out = tmp_path / "run"
    result = runner.invoke(app, ["train", "--out", str(out), "--config", str(config_file)])
    assert result.exit_code == 0, result.output
    report = _read(out / "report.json")
    assert report["kind"] == "train_report"
    assert report["schema_version"] == 1
    assert len((out / "selected_features.txt").read_text(encoding="utf-8").splitlines()) == 2

    metrics_path = tmp_path / "metrics.json"
    result = runner.invoke(
        app, ["eval", "--checkpoint", str(out / "checkpoint.json"), "--out", str(metrics_path)]
    )
    assert result.exit_code == 0, result.output
    metrics = _read(metrics_path)
    assert metrics["kind"] == "metrics"
    assert metrics["metrics"]["tasks"] == report["records"][-1]["tasks"]
    assert metrics["config"] == report["config"]


def test_cli_train_is_reproducible(tmp_path: Path, config_file: Path):
    """
    Test that two runs with the same seed write identical checkpoints and reports up to timing.
    """
    for name in ("first", "second"):
        result = runner.invoke(
            app, ["train", "--out", str(tmp_path / name), "--config", str(config_file), "--seed", "4"]
        )
        assert result.exit_code == 0, result.output

    first, second = (_read(tmp_path / name / "report.json") for name in ("first", "second"))
    first.pop("timing")
    second.pop("timing")
    assert json.dumps(first, sort_keys=True).encode() == json.dumps(second, sort_keys=True).encode()
    assert (tmp_path / "first" / "checkpoint.json").read_bytes() == (
        tmp_path / "second" / "checkpoint.json"
    ).read_bytes()


def test_cli_eval_csv_checkpoint_without_data(tmp_path: Path, config_file: Path):
    """
    Test that a checkpoint trained on a CSV is not evaluated without `--data`.
    """
    runner.invoke(app, ["synth", "--out", str(tmp_path / "synth"), "--config", str(config_file)])
    csv = tmp_path / "synth" / "dataset.csv"
    runner.invoke(
        app, ["train", "--out", str(tmp_path / "run"), "--config", str(config_file), "--data", str(csv)]
    )
    checkpoint = str(tmp_path / "run" / "checkpoint.json")

    result = runner.invoke(app, ["eval", "--checkpoint", checkpoint])
    assert result.exit_code == 5

    result = runner.invoke(app, ["eval", "--checkpoint", checkpoint, "--data", str(csv)])
    assert result.exit_code == 0, result.output


def test_cli_eval_prints_json(tmp_path: Path, config_file: Path):
    """
    Test that `eval` without `--out` prints the metrics document.
    """
    out = tmp_path / "run"
    runner.invoke(app, ["train", "--out", str(out), "--config", str(config_file)])
    result = runner.invoke(app, ["eval", "--checkpoint", str(out / "checkpoint.json")])
    assert result.exit_code == 0, result.output
    assert '"schema_version": 1' in result.stdout


def test_cli_train_on_csv(tmp_path: Path, config_file: Path):
    """
    Test that `train` reads a CSV produced by `synth`.
    """
    runner.invoke(app, ["synth", "--out", str(tmp_path / "synth"), "--config", str(config_file)])
    result = runner.invoke(
        app,
        [
            "train",
            "--out", str(tmp_path / "run"),
            "--config", str(config_file),
            "--data", str(tmp_path / "synth" / "dataset.csv"),
            "--k", "3",
        ],
    )
    assert result.exit_code == 0, result.output
    report = _read(tmp_path / "run" / "report.json")
    assert report["data_source"].endswith("dataset.csv")
    assert len(report["selected_features"]) == 3


def test_cli_train_multiple_seeds(tmp_path: Path, config_file: Path):
    """
    Test that several seeds produce one directory each and a summary.
    """
    out = tmp_path / "runs"
    result = runner.invoke(
        app, ["train", "--out", str(out), "--config", str(config_file), "--seeds", "0,1"]
    )
    assert result.exit_code == 0, result.output
    assert (out / "seed_0" / "checkpoint.json").exists()
    assert (out / "seed_1" / "checkpoint.json").exists()
    summary = _read(out / "summary.json")
    assert summary["kind"] == "train_summary"
    assert summary["runs"]["seeds"] == [0, 1]


def test_cli_ablate_and_sweep(tmp_path: Path, config_file: Path):
    """
    Test that `ablate` and `sweep` write JSON and text tables.
    """
    result = runner.invoke(app, ["ablate", "--out", str(tmp_path / "ab"), "--config", str(config_file)])
    assert result.exit_code == 0, result.output
    rows = _read(tmp_path / "ab" / "ablation.json")["rows"]
    assert [row["label"] for row in rows] == ["single:y_a", "single:y_b", "multi"]
    assert (tmp_path / "ab" / "ablation.txt").read_text(encoding="utf-8").strip()

    result = runner.invoke(
        app, ["sweep", "--out", str(tmp_path / "sw"), "--config", str(config_file), "--sizes", "1,2"]
    )
    assert result.exit_code == 0, result.output
    assert [row["k_final"] for row in _read(tmp_path / "sw" / "sweep.json")["rows"]] == [1, 2]


def test_cli_baseline(tmp_path: Path, config_file: Path):
    result = runner.invoke(
        app, ["baseline", "--out", str(tmp_path / "bl"), "--config", str(config_file), "--k", "3"]
    )
    assert result.exit_code == 0, result.output
    runs = _read(tmp_path / "bl" / "baseline.json")["runs"]
    assert len(runs["ranked_indices"]) == 3


def test_cli_gradcheck(tmp_path: Path):
    """
    Test that every gradient check passes and the results are written.
    """
    result = runner.invoke(app, ["gradcheck", "--out", str(tmp_path / "grad.json")])
    assert result.exit_code == 0, result.output
    document = _read(tmp_path / "grad.json")
    assert all(check["passed"] for check in document["checks"])


def test_cli_config_error_exit_code(tmp_path: Path):
    """
    Test that an unknown configuration key exits with the configuration error code.
    """
    bad = tmp_path / "bad.yaml"
    bad.write_text("train:\n  epoch: 3\n", encoding="utf-8")
    result = runner.invoke(app, ["train", "--out", str(tmp_path / "run"), "--config", str(bad)])
    assert result.exit_code == 2


def test_cli_data_error_exit_code(tmp_path: Path, config_file: Path):
    """
    Test that a malformed CSV exits with the data error code.
    """
    csv = tmp_path / "bad.csv"
    csv.write_text("a,b,y_c\n1,2,0\n3,abc,1\n", encoding="utf-8")
    result = runner.invoke(
        app, ["train", "--out", str(tmp_path / "run"), "--config", str(config_file), "--data", str(csv)]
    )
    assert result.exit_code == 3


def test_cli_missing_checkpoint_exit_code(tmp_path: Path):
    result = runner.invoke(app, ["eval", "--checkpoint", str(tmp_path / "absent.json")])
    assert result.exit_code == 5
