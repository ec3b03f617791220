"""
Module: `test_toppanel.test_model`

Tests for parameter initialisation, masking, the shared encoder and the task heads.

See Also
--------
toppanel.model.network:
    Module under test.
"""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from toppanel.autodiff import Tape, Tensor, constant, grad_check, mul, reduce
from toppanel.exceptions import ContractError, DimensionError
from toppanel.model import (
    ModelConfig,
    TaskSpec,
    apply_mask,
    encode,
    forward,
    init_params,
    predict,
)
from toppanel.selection import SelectionMask, straight_through_mask


@pytest.fixture
def config() -> ModelConfig:
    """Two-task model over 6 features."""
    return ModelConfig(
        d=6,
        k_final=3,
        tasks=(TaskSpec.classification("y_a", 3), TaskSpec.regression("y_b")),
        encoder_layers=(5,),
        latent_dim=4,
    )


class TestTaskSpec:
    """Tests for task specifications."""

    def test_width(self) -> None:
        """Classification heads are num_classes wide, regression heads output_dim wide."""
        assert TaskSpec.classification("a", 4).width == 4
        assert TaskSpec.regression("b", 2).width == 2

    def test_rejects_single_class(self) -> None:
        """A classification task needs two classes."""
        with pytest.raises(ContractError):
            TaskSpec.classification("a", 1)

    def test_dict_round_trip(self) -> None:
        """to_dict / from_dict preserve the task."""
        task = TaskSpec.classification("a", 3)
        assert TaskSpec.from_dict(task.to_dict()) == task


class TestModelConfig:
    """Tests for model configuration validation."""

    def test_duplicate_task_names(self) -> None:
        """Task names must be unique."""
        with pytest.raises(ContractError):
            ModelConfig(d=3, k_final=1, tasks=(TaskSpec.regression("y"), TaskSpec.regression("y")))

    def test_k_final_out_of_range(self) -> None:
        """k_final cannot exceed d."""
        with pytest.raises(ContractError):
            ModelConfig(d=3, k_final=4, tasks=(TaskSpec.regression("y"),))

    def test_layer_widths(self, config: ModelConfig) -> None:
        """Input, hidden and latent widths in order."""
        assert config.layer_widths == (6, 5, 4)

    def test_dict_round_trip(self, config: ModelConfig) -> None:
        """to_dict / from_dict preserve the configuration."""
        assert ModelConfig.from_dict(config.to_dict()) == config


class TestInitParams:
    """Tests for parameter initialisation."""

    def test_same_seed_same_params(self, config: ModelConfig) -> None:
        """Two draws with the same seed are bit-identical."""
        # Act
        first = init_params(config, np.random.default_rng(0))
        second = init_params(config, np.random.default_rng(0))

        # Assert
        for (name, a), (_, b) in zip(first.named_tensors(), second.named_tensors()):
            assert_array_equal(a.values, b.values, err_msg=name)

    def test_scores_near_zero(self, config: ModelConfig) -> None:
        """Scores lie within [-0.01, 0.01]."""
        params = init_params(config, np.random.default_rng(1))
        assert np.all(np.abs(params.scores.values) <= 0.01)

    def test_fan_in_bounds(self, config: ModelConfig) -> None:
        """A layer of fan-in f has weights within sqrt(6/f) and zero biases."""
        # Act
        params = init_params(config, np.random.default_rng(2))

        # Assert
        for weight, bias in params.encoder:
            assert np.all(np.abs(weight.values) <= np.sqrt(6.0 / weight.shape[0]))
            assert_array_equal(bias.values, np.zeros(bias.shape))

    def test_named_tensors(self, config: ModelConfig) -> None:
        """Scores come first, then encoder layers, then heads."""
        names = [name for name, _ in init_params(config, np.random.default_rng(0)).named_tensors()]
        assert names == [
            "scores",
            "encoder.0.weight",
            "encoder.0.bias",
            "encoder.1.weight",
            "encoder.1.bias",
            "heads.y_a.weight",
            "heads.y_a.bias",
            "heads.y_b.weight",
            "heads.y_b.bias",
        ]


class TestApplyMask:
    """Tests for feature masking."""

    def test_hard_mask(self) -> None:
        """hard=[1,0,1] on [[1,2,3]] gives [[1,0,3]]."""
        # Arrange
        mask = SelectionMask.fixed([0, 2], 3)

        # Act
        out = apply_mask(constant([[1.0, 2.0, 3.0]]), mask)

        # Assert
        assert_array_equal(out.values, [[1.0, 0.0, 3.0]])

    def test_full_mask_is_identity(self) -> None:
        """k=d leaves X unchanged."""
        # Arrange
        X = np.random.default_rng(3).standard_normal((4, 5))
        mask = straight_through_mask(constant(np.arange(5.0)), 0.1, 5)

        # Act
        out = apply_mask(constant(X), mask)

        # Assert
        assert_array_equal(out.values, X)

    def test_width_mismatch(self) -> None:
        """The mask must match the feature count."""
        with pytest.raises(DimensionError):
            apply_mask(constant(np.ones((2, 4))), SelectionMask.fixed([0], 3))

    def test_masked_column_does_not_reach_outputs(self, config: ModelConfig) -> None:
        """Overwriting a masked-out column leaves every output bit-identical."""
        # Arrange
        rng = np.random.default_rng(4)
        params = init_params(config, rng)
        mask = SelectionMask.fixed([0, 2, 5], config.d)
        X = rng.standard_normal((8, config.d))
        altered = X.copy()
        altered[:, [1, 3, 4]] = rng.standard_normal((8, 3)) * 100.0

        # Act
        before = forward(constant(X), mask, params, config)
        after = forward(constant(altered), mask, params, config)

        # Assert
        for name in before:
            assert_array_equal(before[name].values, after[name].values)


class TestEncodeAndPredict:
    """Tests for the shared encoder and task heads."""

    def test_zero_input_zero_latent(self, config: ModelConfig) -> None:
        """Zero inputs with zero biases give a zero latent."""
        params = init_params(config, np.random.default_rng(5))
        latent = encode(constant(np.zeros((3, config.d))), params)
        assert_array_equal(latent.values, np.zeros((3, config.latent_dim)))

    def test_single_linear_layer(self) -> None:
        """Without hidden layers the encoder is one matmul plus bias."""
        # Arrange
        config = ModelConfig(d=4, k_final=2, tasks=(TaskSpec.regression("y"),), encoder_layers=(), latent_dim=3)
        params = init_params(config, np.random.default_rng(6))
        X = np.random.default_rng(7).standard_normal((5, 4))
        weight, bias = params.encoder[0]

        # Act
        latent = encode(constant(X), params)

        # Assert
        assert_allclose(latent.values, X @ weight.values + bias.values)

    def test_zero_head_gives_uniform_probabilities(self, config: ModelConfig) -> None:
        """Zero latent and zero head weights give zero logits."""
        # Arrange
        params = init_params(config, np.random.default_rng(8))
        weight, bias = params.heads["y_a"]
        weight.values[:] = 0.0

        # Act
        logits = predict(constant(np.zeros((2, config.latent_dim))), config.task("y_a"), params)

        # Assert
        assert_array_equal(logits.values, np.zeros((2, 3)))

    def test_latent_width_mismatch(self, config: ModelConfig) -> None:
        """The head rejects latents of the wrong width."""
        params = init_params(config, np.random.default_rng(9))
        with pytest.raises(DimensionError):
            predict(constant(np.zeros((2, 7))), config.task("y_a"), params)

    def test_heads_have_independent_gradients(self, config: ModelConfig) -> None:
        """A loss on one head leaves the other head without gradient."""
        # Arrange
        rng = np.random.default_rng(10)
        params = init_params(config, rng)
        params.zero_grad()
        mask = SelectionMask.fixed([0, 1, 2], config.d)

        # Act
        with Tape() as tape:
            outputs = forward(constant(rng.standard_normal((4, config.d))), mask, params, config)
            loss = reduce("sum", outputs["y_a"])
        tape.backward(loss)

        # Assert
        assert np.any(params.heads["y_a"][0].grad != 0.0)
        assert_array_equal(params.heads["y_b"][0].grad, 0.0)

    def test_encoder_gradient(self, config: ModelConfig) -> None:
        """The encoder gradient on a 3x4 toy passes the finite-difference check."""
        # Arrange
        rng = np.random.default_rng(11)
        small = ModelConfig(d=4, k_final=2, tasks=(TaskSpec.regression("y"),), encoder_layers=(), latent_dim=3)
        params = init_params(small, rng)
        direction = constant(rng.standard_normal((3, 3)))

        def f(x: Tensor) -> Tensor:
            return reduce("sum", mul(encode(x, params), direction))

        # Act
        error = grad_check(f, Tensor(rng.standard_normal((3, 4))))

        # Assert
        assert error < 1e-5

    def test_head_gradient(self, config: ModelConfig) -> None:
        """The head gradient passes the finite-difference check."""
        # Arrange
        rng = np.random.default_rng(12)
        params = init_params(config, rng)
        latent = constant(rng.standard_normal((5, config.latent_dim)))
        direction = constant(rng.standard_normal((5, 3)))
        _, bias = params.heads["y_a"]

        def f(weight: Tensor) -> Tensor:
            params.heads["y_a"] = (weight, bias)
            return reduce("sum", mul(predict(latent, config.task("y_a"), params), direction))

        # Act
        error = grad_check(f, Tensor(rng.standard_normal((config.latent_dim, 3))))

        # Assert
        assert error < 1e-5
