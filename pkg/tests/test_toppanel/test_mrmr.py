"""
Module: `test_toppanel.test_mrmr`

Tests for the mRMR ranking and fixed-mask retraining.

See Also
--------
toppanel.baselines.mrmr:
    Module under test.
"""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from toppanel.baselines import (
    F_CAP,
    f_regression_relevance,
    f_statistic_relevance,
    mrmr_select,
    retrain_fixed_mask,
)
from toppanel.data import SynthSpec, SynthTask, generate_synthetic, split
from toppanel.exceptions import ContractError
from toppanel.model import ModelConfig
from toppanel.training import TrainConfig

LABELS = np.array([0, 0, 0, 0, 1, 1, 1, 1])
X_COL = np.array([0.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 4.0])
Z_COL = np.array([1.0, -1.0, -1.0, 1.0, 3.0, -1.0, 1.0, 1.0])


class TestFStatistic:
    """Tests for ANOVA relevance."""

    def test_hand_example(self) -> None:
        """Class means 1 and 3 with unit within-class variance give F = 6."""
        # Arrange
        column = np.array([[0.0], [1.0], [2.0], [2.0], [3.0], [4.0]])

        # Act
        relevance = f_statistic_relevance(column, np.array([0, 0, 0, 1, 1, 1]))

        # Assert
        assert relevance[0] == pytest.approx(6.0)

    def test_toy_columns(self) -> None:
        """The shifted ramp scores 1.2 and the zig-zag 1.0."""
        relevance = f_statistic_relevance(np.column_stack([X_COL, Z_COL]), LABELS)
        assert_allclose(relevance, [1.2, 1.0])

    def test_zero_within_class_variance(self) -> None:
        """A column constant within classes with distinct means is capped; a constant one is 0."""
        # Arrange
        X = np.column_stack([[0.0, 0.0, 1.0, 1.0], [2.0, 2.0, 2.0, 2.0]])

        # Act
        relevance = f_statistic_relevance(X, np.array([0, 0, 1, 1]))

        # Assert
        assert_array_equal(relevance, [F_CAP, 0.0])

    def test_missing_labels_are_ignored(self) -> None:
        """Rows labeled -1 do not change the statistic."""
        # Arrange
        X = np.column_stack([np.append(X_COL, 100.0)])
        labels = np.append(LABELS, -1)

        # Act & Assert
        assert f_statistic_relevance(X, labels)[0] == pytest.approx(1.2)

    def test_single_class(self) -> None:
        """With one class every column scores 0."""
        assert_array_equal(f_statistic_relevance(np.ones((3, 2)), np.zeros(3)), [0.0, 0.0])

    def test_affine_invariance(self) -> None:
        """Scaling and shifting a column leaves its F-statistic unchanged."""
        # Arrange
        rng = np.random.default_rng(0)
        X = rng.standard_normal((30, 4))
        labels = rng.integers(0, 3, 30)

        # Act
        base = f_statistic_relevance(X, labels)
        moved = f_statistic_relevance(-3.0 * X + 7.0, labels)

        # Assert
        assert_allclose(moved, base, rtol=1e-9)


class TestFRegression:
    """Tests for regression relevance."""

    def test_exact_fit_is_capped(self) -> None:
        """A column equal to the target scores F_CAP."""
        x = np.arange(6.0)
        assert f_regression_relevance(x[:, None], 2.0 * x + 1.0)[0] == F_CAP

    def test_uncorrelated_column(self) -> None:
        """A column orthogonal to the centred target scores 0."""
        x = np.array([1.0, -1.0, -1.0, 1.0])
        y = np.array([1.0, 2.0, 3.0, 4.0])
        assert f_regression_relevance(x[:, None], y)[0] == pytest.approx(0.0, abs=1e-12)

    def test_nan_targets_are_ignored(self) -> None:
        """Rows without target do not enter the correlation."""
        x = np.array([0.0, 1.0, 2.0, 3.0, 50.0])
        y = np.array([0.0, 1.0, 2.0, 3.0, np.nan])
        assert f_regression_relevance(x[:, None], y)[0] == F_CAP

    def test_matches_closed_form(self) -> None:
        """The statistic equals r² / (1 - r²) * (n - 2) with the Pearson r of column and target."""
        # Arrange
        rng = np.random.default_rng(7)
        X = rng.standard_normal((25, 3))
        y = X[:, 0] - 0.5 * X[:, 1] + rng.standard_normal(25)

        # Act
        relevance = f_regression_relevance(X, y)

        # Assert
        r = np.array([np.corrcoef(X[:, j], y)[0, 1] for j in range(3)])
        assert_allclose(relevance, r**2 / (1.0 - r**2) * 23, rtol=1e-9)

    def test_constant_column_scores_zero(self) -> None:
        """A column without variance has no defined correlation and scores 0."""
        X = np.column_stack([np.full(5, 3.0), np.arange(5.0)])
        y = np.array([0.0, 2.0, 1.0, 4.0, 3.0])
        assert f_regression_relevance(X, y)[0] == 0.0


class TestMrmrSelect:
    """Tests for greedy ranking."""

    def test_redundant_copy_is_ranked_last(self) -> None:
        """An exact copy of the first pick loses to a weaker but uncorrelated column."""
        # Arrange
        X = np.column_stack([Z_COL, X_COL, X_COL])

        # Act
        order = mrmr_select(X, LABELS, 3)

        # Assert
        assert order == [1, 0, 2]

    def test_first_pick_is_most_relevant(self) -> None:
        """k=1 returns the column of largest relevance."""
        # Arrange
        rng = np.random.default_rng(1)
        X = rng.standard_normal((40, 6))
        labels = rng.integers(0, 2, 40)

        # Act
        pick = mrmr_select(X, labels, 1)

        # Assert
        assert pick == [int(np.argmax(f_statistic_relevance(X, labels)))]

    def test_regression_kind(self) -> None:
        """Regression targets use the regression relevance."""
        # Arrange
        rng = np.random.default_rng(2)
        X = rng.standard_normal((50, 5))
        y = 3.0 * X[:, 3] + 0.01 * rng.standard_normal(50)

        # Act & Assert
        assert mrmr_select(X, y, 1, kind="regression") == [3]

    def test_distinct_indices(self) -> None:
        """k=d ranks every column exactly once."""
        rng = np.random.default_rng(3)
        order = mrmr_select(rng.standard_normal((20, 7)), rng.integers(0, 2, 20), 7)
        assert sorted(order) == list(range(7))

    def test_constant_column_adds_no_redundancy(self) -> None:
        """A constant column neither blocks the ranking nor counts as correlated."""
        # Arrange
        X = np.column_stack([X_COL, np.ones(8), Z_COL])

        # Act
        order = mrmr_select(X, LABELS, 3)

        # Assert
        assert order == [0, 2, 1]

    def test_k_out_of_range(self) -> None:
        """k must lie in [1, d]."""
        with pytest.raises(ContractError):
            mrmr_select(np.zeros((4, 2)), LABELS[:4], 3)


def test_retrain_fixed_mask_reports_the_chosen_panel() -> None:
    """Retraining on fixed indices evaluates exactly those features."""
    # Arrange
    dataset = split(
        generate_synthetic(
            SynthSpec(n_samples=60, n_features=8, n_informative=2, tasks=(SynthTask("y_a"),))
        ),
        seed=0,
    )
    model_config = ModelConfig(
        d=8, k_final=2, tasks=dataset.task_specs(), encoder_layers=(4,), latent_dim=3
    )
    indices = sorted(dataset.ground_truth_features)

    # Act
    record = retrain_fixed_mask(dataset, indices, model_config, TrainConfig(epochs=2, batch_size=16))

    # Assert
    assert record.selection == {"precision": 1.0, "recall": 1.0}
    assert "y_a" in record.tasks
