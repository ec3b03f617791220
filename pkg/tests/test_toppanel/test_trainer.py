"""
Module: `test_toppanel.test_trainer`

Tests for the training loop, held-out evaluation and single-task restriction.

See Also
--------
toppanel.training.trainer:
    Module under test.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from toppanel.data import Dataset, LabelColumn, SynthSpec, SynthTask, generate_synthetic, split
from toppanel.exceptions import ContractError, DataError, DimensionError, TrainingDivergenceError
from toppanel.model import ModelConfig, TaskSpec, init_params
from toppanel.selection import k_at
from toppanel.training import (
    TrainConfig,
    eval_mask,
    evaluate,
    ranked_selection,
    single_task_mode,
    train,
)


@pytest.fixture
def dataset() -> Dataset:
    """80 rows, 10 features, one 3-class and one regression task, 80/20 split."""
    spec = SynthSpec(
        n_samples=80,
        n_features=10,
        n_informative=3,
        tasks=(SynthTask("y_a", num_classes=3), SynthTask("y_r", kind="regression")),
        seed=1,
    )
    return split(generate_synthetic(spec), seed=0)


@pytest.fixture
def model_config(dataset: Dataset) -> ModelConfig:
    return ModelConfig(
        d=10, k_final=3, tasks=dataset.task_specs(), encoder_layers=(6,), latent_dim=4, seed=2
    )


SHORT = TrainConfig(epochs=3, batch_size=16, learning_rate=0.01, seed=5, eval_every=2)


class TestTrain:
    """Tests for end-to-end training."""

    def test_same_seeds_same_run(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """Two runs with the same configuration are bit-identical."""
        # Act
        _, first = train(dataset, model_config, SHORT)
        _, second = train(dataset, model_config, SHORT)

        # Assert
        assert first.loss_trace == second.loss_trace
        assert first.final_scores == second.final_scores
        assert first.selected_indices == second.selected_indices
        assert first.to_dict(include_timing=False) == second.to_dict(include_timing=False)

    def test_train_seed_changes_the_run(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """A different training seed shuffles and perturbs differently."""
        # Act
        _, first = train(dataset, model_config, SHORT)
        _, second = train(dataset, model_config, TrainConfig(epochs=3, batch_size=16, learning_rate=0.01, seed=6))

        # Assert
        assert first.loss_trace != second.loss_trace

    def test_traces_follow_schedules(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """One trace entry per step; k follows the sparsity schedule and ends at k_final."""
        # Arrange
        total = SHORT.epochs * SHORT.steps_per_epoch(dataset.train_indices.size)
        sparsity = model_config.schedule.sparsity(model_config.d, model_config.k_final, total)

        # Act
        _, report = train(dataset, model_config, SHORT)

        # Assert
        assert len(report.loss_trace) == len(report.tau_trace) == total
        assert report.k_trace == [k_at(sparsity, step) for step in range(total)]
        assert report.k_trace[0] == model_config.d
        assert all(a >= b for a, b in zip(report.tau_trace, report.tau_trace[1:]))

    def test_selection_size_and_order(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """The panel holds k_final distinct features; ranked order sorts to the panel."""
        # Act
        params, report = train(dataset, model_config, SHORT)

        # Assert
        assert len(report.selected_indices) == model_config.k_final
        assert tuple(sorted(report.ranked_indices)) == report.selected_indices
        assert_array_equal(params.scores.values, report.final_scores)
        assert tuple(eval_mask(params, model_config).indices) == report.selected_indices

    def test_evaluates_on_schedule(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """Records at every eval_every epochs and after the last epoch."""
        # Act
        _, report = train(dataset, model_config, SHORT)

        # Assert
        assert [record.epoch for record in report.records] == [2, 3]
        assert set(report.final_record.tasks) == {"y_a", "y_r"}
        assert report.final_record.selection is not None

    def test_scores_are_trained(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """The score vector moves away from its initialisation."""
        # Arrange
        initial = init_params(model_config, np.random.default_rng(model_config.seed)).scores.values

        # Act
        params, _ = train(dataset, model_config, SHORT)

        # Assert
        assert not np.array_equal(params.scores.values, initial)

    def test_fixed_mask(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """A frozen mask keeps the scores, drops the tau trace and reports the given panel."""
        # Arrange
        initial = init_params(model_config, np.random.default_rng(model_config.seed)).scores.values

        # Act
        params, report = train(dataset, model_config, SHORT, fixed_indices=[7, 1, 4])

        # Assert
        assert_array_equal(params.scores.values, initial)
        assert report.tau_trace == []
        assert set(report.k_trace) == {3}
        assert report.selected_indices == (1, 4, 7)
        assert report.ranked_indices == (1, 4, 7)

    def test_without_split_trains_on_every_row(self, model_config: ModelConfig) -> None:
        """A dataset without split trains on all rows and records nothing."""
        # Arrange
        unsplit = generate_synthetic(
            SynthSpec(
                n_samples=20,
                n_features=10,
                n_informative=2,
                tasks=(SynthTask("y_a", num_classes=3), SynthTask("y_r", kind="regression")),
            )
        )

        # Act
        _, report = train(unsplit, model_config, TrainConfig(epochs=1, batch_size=10))

        # Assert
        assert len(report.loss_trace) == 2
        assert report.records == []

    def test_divergence(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """A non-finite loss stops training with the step, tau and k."""
        # Arrange
        X = dataset.X.copy()
        X[:, :] = np.nan
        broken = Dataset(X, dataset.feature_names, dataset.labels, split_assignment=dataset.split_assignment)

        # Act & Assert
        with pytest.raises(TrainingDivergenceError, match="step 0") as info:
            train(broken, model_config, SHORT)
        assert info.value.context["k"] == model_config.d

    def test_width_mismatch(self, dataset: Dataset) -> None:
        """The model width must equal the dataset width."""
        config = ModelConfig(d=9, k_final=2, tasks=dataset.task_specs(), encoder_layers=(), latent_dim=2)
        with pytest.raises(DimensionError):
            train(dataset, config, SHORT)

    def test_unknown_task(self, dataset: Dataset) -> None:
        """Every task needs a label column."""
        config = ModelConfig(
            d=10, k_final=2, tasks=(TaskSpec.classification("y_z", 2),), encoder_layers=(), latent_dim=2
        )
        with pytest.raises(DataError, match="y_z"):
            train(dataset, config, SHORT)


class TestEvaluate:
    """Tests for held-out evaluation."""

    def test_metrics_in_range(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """Classification metrics lie in [0, 1]."""
        # Arrange
        params = init_params(model_config, np.random.default_rng(0))

        # Act
        record = evaluate(params, model_config, dataset, step=0, epoch=0)

        # Assert
        for name, value in record.tasks["y_a"].items():
            assert math.isnan(value) or 0.0 <= value <= 1.0, name
        assert record.step == 0

    def test_recovery_of_known_features(self, dataset: Dataset, model_config: ModelConfig) -> None:
        """Scores peaked on the informative features give full precision."""
        # Arrange
        params = init_params(model_config, np.random.default_rng(0))
        params.scores.values[:] = 0.0
        params.scores.values[sorted(dataset.ground_truth_features)[:3]] = 1.0

        # Act
        record = evaluate(params, model_config, dataset)

        # Assert
        assert record.selection["precision"] == 1.0


class TestHelpers:
    """Tests for selection ranking and task restriction."""

    def test_ranked_selection_ties(self) -> None:
        """Equal scores rank by lower index first."""
        assert ranked_selection(np.array([1.0, 3.0, 3.0, 0.0]), 3) == [1, 2, 0]

    def test_single_task_mode(self, model_config: ModelConfig) -> None:
        """The restricted model keeps only the chosen task."""
        single = single_task_mode(model_config, 1)
        assert [task.name for task in single.tasks] == ["y_r"]
        assert single.d == model_config.d

    def test_single_task_index_range(self, model_config: ModelConfig) -> None:
        with pytest.raises(ContractError):
            single_task_mode(model_config, 2)

    def test_config_validation(self) -> None:
        """Epochs and batch size must be positive."""
        with pytest.raises(ContractError):
            TrainConfig(epochs=0)


def _separable_toy() -> Dataset:
    """200 rows of 2 features labeled by the sign of x0 + x1, kept at distance from the boundary."""
    rng = np.random.default_rng(0)
    X = rng.standard_normal((600, 2))
    X = X[np.abs(X.sum(axis=1)) >= 1.0][:200]
    labels = (X.sum(axis=1) > 0).astype(np.int64)
    dataset = Dataset(
        X=X,
        feature_names=("f0", "f1"),
        labels=(LabelColumn("y", "classification", labels, 2),),
    )
    return split(dataset, seed=0)


class TestLinearToy:
    """Training a single linear layer on linearly separable data."""

    def test_reaches_full_train_accuracy(self) -> None:
        """Without hidden layers the toy is fitted perfectly within 200 epochs."""
        # Arrange
        toy = _separable_toy()
        config = ModelConfig(
            d=2, k_final=2, tasks=toy.task_specs(), encoder_layers=(), latent_dim=2, seed=0
        )
        schedule = TrainConfig(epochs=200, batch_size=32, learning_rate=0.05, seed=0, eval_every=200)

        # Act
        params, _ = train(toy, config, schedule)
        record = evaluate(params, config, toy, rows=toy.train_indices)

        # Assert
        assert record.tasks["y"]["accuracy"] == 1.0

    def test_moving_average_loss_decreases(self) -> None:
        """The 10-epoch moving average of the full-batch loss never goes up."""
        # Arrange
        toy = _separable_toy()
        config = ModelConfig(
            d=2, k_final=2, tasks=toy.task_specs(), encoder_layers=(), latent_dim=2, seed=0
        )
        full_batch = TrainConfig(
            epochs=60, batch_size=toy.train_indices.size, learning_rate=0.02, seed=0, eval_every=60
        )

        # Act
        _, report = train(toy, config, full_batch)
        moving = np.convolve(report.loss_trace, np.ones(10) / 10, mode="valid")

        # Assert
        assert len(report.loss_trace) == 60
        assert np.all(np.diff(moving) <= 1e-12)
