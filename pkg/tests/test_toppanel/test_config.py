"""Unit tests for run configuration parsing and the JSON/YAML helpers."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from toppanel.config import ConfigValidationError, RunConfig, validate_config
from toppanel.model import TaskSpec
from toppanel.utils.io import load_yaml_config, read_json, write_json


class TestRunConfigFromDict:
    """Tests for RunConfig.from_dict."""

    def test_empty_mapping_gives_defaults(self) -> None:
        """Every section takes its defaults."""
        # Act
        config = RunConfig.from_dict({})

        # Assert
        assert config.model.k_final == 8
        assert config.model.encoder_layers == (128, 128)
        assert config.train.epochs == 200
        assert config.schedule.tau0 == 4.0
        assert config.data.test_fraction == 0.2
        assert config.synth.n_features == 100

    def test_partial_sections(self) -> None:
        """Given keys override the defaults of their section only."""
        # Act
        config = RunConfig.from_dict(
            {"model": {"k_final": 4, "encoder_layers": [16]}, "train": {"learning_rate": 1}}
        )

        # Assert
        assert config.model.k_final == 4
        assert config.model.encoder_layers == (16,)
        assert config.model.latent_dim == 64
        assert config.train.learning_rate == 1.0
        assert isinstance(config.train.learning_rate, float)

    def test_unknown_top_level_key(self) -> None:
        """Unknown sections are rejected by name."""
        with pytest.raises(ConfigValidationError, match="Unknown top-level key"):
            RunConfig.from_dict({"modle": {}})

    def test_unknown_section_key(self) -> None:
        """Unknown keys inside a section are rejected with the section name."""
        with pytest.raises(ConfigValidationError, match=r"Unknown train key\(s\): epoch"):
            RunConfig.from_dict({"train": {"epoch": 3}})

    def test_wrong_type(self) -> None:
        """A string where an integer is expected is rejected."""
        with pytest.raises(ConfigValidationError, match="train.epochs"):
            RunConfig.from_dict({"train": {"epochs": "ten"}})

    def test_bool_is_not_int(self) -> None:
        """Booleans do not pass as integers."""
        with pytest.raises(ConfigValidationError):
            RunConfig.from_dict({"model": {"k_final": True}})

    def test_invalid_value(self) -> None:
        """Values rejected by a section's own checks surface as configuration errors."""
        with pytest.raises(ConfigValidationError, match="'train'"):
            RunConfig.from_dict({"train": {"batch_size": 0}})

    def test_section_must_be_mapping(self) -> None:
        with pytest.raises(ConfigValidationError):
            RunConfig.from_dict({"data": [1, 2]})

    def test_synth_tasks(self) -> None:
        """Synthetic tasks are parsed from a list of mappings."""
        # Act
        config = RunConfig.from_dict(
            {"synth": {"tasks": [{"name": "y_a", "num_classes": 3}, {"name": "y_r", "kind": "regression"}]}}
        )

        # Assert
        assert [task.name for task in config.synth.tasks] == ["y_a", "y_r"]
        assert config.synth.tasks[1].kind == "regression"

    def test_empty_synth_tasks(self) -> None:
        with pytest.raises(ConfigValidationError, match="synth.tasks"):
            RunConfig.from_dict({"synth": {"tasks": []}})

    def test_validate_config(self) -> None:
        """validate_config raises on the same errors as from_dict."""
        with pytest.raises(ConfigValidationError):
            validate_config({"schedule": {"bogus": 1}})


class TestRunConfigTransforms:
    """Tests for round trips, overrides and seeding."""

    def test_dict_round_trip(self) -> None:
        """to_dict then from_dict restores an equal configuration."""
        # Arrange
        config = RunConfig.from_dict(
            {"model": {"encoder_layers": [8, 4]}, "data": {"label_columns": ["y_a"], "hvg_top_m": 50}}
        )

        # Act & Assert
        assert RunConfig.from_dict(config.to_dict()) == config

    def test_to_dict_is_json_serializable(self) -> None:
        json.dumps(RunConfig().to_dict())

    def test_with_overrides(self) -> None:
        """Nested overrides merge into the existing sections."""
        # Act
        config = RunConfig.from_dict({"train": {"epochs": 5}}).with_overrides({"train": {"batch_size": 8}})

        # Assert
        assert config.train.epochs == 5
        assert config.train.batch_size == 8

    def test_with_seed(self) -> None:
        """with_seed sets the initialisation and training seeds, not the split seed."""
        # Act
        config = RunConfig.from_dict({"data": {"split_seed": 9}}).with_seed(3)

        # Assert
        assert config.model.seed == 3
        assert config.train.seed == 3
        assert config.data.split_seed == 9

    def test_model_config(self) -> None:
        """The model configuration takes width and tasks from the dataset."""
        # Act
        model = RunConfig.from_dict({"model": {"k_final": 2}}).model_config(
            (TaskSpec.classification("y_a", 3),), 10
        )

        # Assert
        assert model.d == 10
        assert model.k_final == 2

    def test_model_config_rejects_large_panel(self) -> None:
        """k_final larger than the dataset width is a configuration error."""
        with pytest.raises(ConfigValidationError):
            RunConfig().model_config((TaskSpec.regression("y"),), 4)


class TestYamlAndJson:
    """Tests for the file helpers."""

    def test_load_yaml(self, tmp_path: Path) -> None:
        """A YAML file loads as a dictionary accepted by RunConfig."""
        # Arrange
        path = tmp_path / "run.yaml"
        path.write_text("model:\n  k_final: 3\ntrain:\n  epochs: 2\n", encoding="utf-8")

        # Act
        config = RunConfig.from_dict(load_yaml_config(path))

        # Assert
        assert config.model.k_final == 3
        assert config.train.epochs == 2

    def test_empty_yaml(self, tmp_path: Path) -> None:
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")
        assert load_yaml_config(path) == {}

    def test_invalid_yaml(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.yaml"
        path.write_text("model: [unclosed\n", encoding="utf-8")
        with pytest.raises(ConfigValidationError):
            load_yaml_config(path)

    def test_non_mapping_root(self, tmp_path: Path) -> None:
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigValidationError, match="mapping"):
            load_yaml_config(path)

    def test_missing_yaml(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigValidationError):
            load_yaml_config(tmp_path / "absent.yaml")

    def test_write_json_adds_schema(self, tmp_path: Path) -> None:
        """Documents carry schema_version and kind; identical payloads give identical bytes."""
        # Act
        first = write_json(tmp_path / "a.json", {"b": 1, "a": [1, 2]}, kind="metrics")
        second = write_json(tmp_path / "b.json", {"a": [1, 2], "b": 1}, kind="metrics")

        # Assert
        document = read_json(first)
        assert document["schema_version"] == 1
        assert document["kind"] == "metrics"
        assert first.read_bytes() == second.read_bytes()
