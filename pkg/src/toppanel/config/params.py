"""
Module: `toppanel.config.params`

Typed run configuration assembled from one YAML file.

The file has five optional sections; every missing key takes the documented default:

.. code-block:: yaml

    model:    {encoder_layers: [128, 128], latent_dim: 64, k_final: 8, noise_scale0: 0.5, seed: 0}
    schedule: {tau0: 4.0, tau_min: 0.05, tau_floor_fraction: 0.8, warmup_fraction: 0.1, ...}
    train:    {epochs: 200, batch_size: 64, learning_rate: 0.001, seed: 0, eval_every: 10, ...}
    data:     {label_prefix: "y_", hvg_top_m: null, binarize: false, split_seed: 0, ...}
    synth:    {n_samples: 2000, n_features: 100, n_informative: 8, tasks: [...], ...}

Classes
-------
ModelSection
    Architecture, final panel size, noise and initialisation seed.
DataSection
    Label columns, preprocessing and split options.
RunConfig
    All sections together.

Notes
-----
Sections are frozen `attrs` classes. Construction from raw dictionaries rejects unknown keys and
values of the wrong type with `ConfigValidationError`.
"""

from __future__ import annotations

from typing import Any, Iterable, Mapping

import attr

from toppanel.config.exceptions import ConfigValidationError
from toppanel.data import SynthSpec, SynthTask
from toppanel.exceptions import ToppanelError
from toppanel.model import ModelConfig, TaskSpec
from toppanel.model.network import DEFAULT_ENCODER_LAYERS, DEFAULT_LATENT_DIM, DEFAULT_NOISE_SCALE0
from toppanel.selection import ScheduleConfig
from toppanel.training import TrainConfig

DEFAULT_K_FINAL: int = 8
DEFAULT_LABEL_PREFIX: str = "y_"
DEFAULT_TEST_FRACTION: float = 0.2
SECTIONS: tuple[str, ...] = ("model", "schedule", "train", "data", "synth")


def _deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    """Recursively merge override into base."""
    merged: dict[str, Any] = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _ensure_known_keys(data: Mapping[str, Any], *, allowed: Iterable[str], context: str) -> None:
    allowed_set = set(allowed)
    unknown = sorted(str(key) for key in data if key not in allowed_set)
    if unknown:
        raise ConfigValidationError(f"Unknown {context} key(s): {', '.join(unknown)}")


def _check_type(context: str, key: str, value: Any, default: Any) -> None:
    if value is None or default is None:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, tuple):
        ok = isinstance(value, (list, tuple))
    else:
        ok = True
    if not ok:
        raise ConfigValidationError(
            f"{context}.{key} must be of type {type(default).__name__}, got {value!r}"
        )


def _build(cls: type, data: Any, context: str, **converted: Any) -> Any:
    """Instantiate the attrs class `cls` from a mapping, checking keys and scalar types."""
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigValidationError(f"Section '{context}' must be a mapping.")
    fields = {field.name: field for field in attr.fields(cls)}
    _ensure_known_keys(data, allowed=fields, context=context)
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in converted:
            continue
        default = fields[key].default
        if isinstance(default, attr.Factory):  # type: ignore[arg-type]
            default = None
        _check_type(context, key, value, default)
        if isinstance(default, float) and value is not None:
            value = float(value)
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    kwargs.update({key: value for key, value in converted.items() if key in data})
    try:
        return cls(**kwargs)
    except (ToppanelError, TypeError, ValueError) as exc:
        raise ConfigValidationError(f"Invalid '{context}' section: {exc}") from exc


@attr.s(auto_attribs=True, frozen=True)
class ModelSection:
    """
    Architecture settings.

    Parameters
    ----------
    encoder_layers : tuple[int, ...]
        Hidden widths of the shared encoder (may be empty).
    latent_dim : int
        Width of the shared representation.
    k_final : int
        Size of the selected panel.
    noise_scale0 : float
        Initial Gumbel noise scale.
    seed : int
        Seed of the parameter initialisation.
    """

    encoder_layers: tuple[int, ...] = DEFAULT_ENCODER_LAYERS
    latent_dim: int = DEFAULT_LATENT_DIM
    k_final: int = DEFAULT_K_FINAL
    noise_scale0: float = DEFAULT_NOISE_SCALE0
    seed: int = 0


@attr.s(auto_attribs=True, frozen=True)
class DataSection:
    """
    Ingestion, preprocessing and split options.

    Parameters
    ----------
    label_columns : tuple[str, ...], optional
        Label column names; defaults to the columns starting with `label_prefix`.
    label_prefix : str
        Prefix identifying label columns.
    regression_columns : tuple[str, ...]
        Label columns read as regression targets.
    hvg_top_m : int, optional
        Keep only the `hvg_top_m` most variable features.
    binarize : bool
        Binarize the features at `binarize_threshold`.
    binarize_threshold : float
        Binarization threshold.
    split_seed : int
        Seed of the train/test split.
    test_fraction : float
        Fraction of rows held out for testing.
    """

    label_columns: tuple[str, ...] | None = None
    label_prefix: str = DEFAULT_LABEL_PREFIX
    regression_columns: tuple[str, ...] = ()
    hvg_top_m: int | None = None
    binarize: bool = False
    binarize_threshold: float = 0.0
    split_seed: int = 0
    test_fraction: float = DEFAULT_TEST_FRACTION

    def __attrs_post_init__(self) -> None:
        if self.hvg_top_m is not None and self.hvg_top_m < 1:
            raise ValueError("hvg_top_m must be positive")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in [0, 1)")


def _synth_from_dict(data: Any) -> SynthSpec:
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigValidationError("Section 'synth' must be a mapping.")
    tasks = data.get("tasks")
    converted: dict[str, Any] = {}
    if tasks is not None:
        if not isinstance(tasks, list) or not tasks:
            raise ConfigValidationError("synth.tasks must be a non-empty list of mappings.")
        converted["tasks"] = tuple(
            _build(SynthTask, task, f"synth.tasks[{index}]") for index, task in enumerate(tasks)
        )
    return _build(SynthSpec, data, "synth", **converted)


@attr.s(auto_attribs=True, frozen=True)
class RunConfig:
    """
    Complete configuration of a command.

    Methods
    -------
    from_dict(data)
        Build from a parsed YAML mapping.
    to_dict()
        Effective configuration, echoed into every output.
    with_overrides(overrides)
        Deep-merge a nested mapping of overrides.
    model_config(tasks, d)
        Model configuration for a dataset with the given tasks and width.
    """

    model: ModelSection = attr.Factory(ModelSection)
    schedule: ScheduleConfig = attr.Factory(ScheduleConfig)
    train: TrainConfig = attr.Factory(TrainConfig)
    data: DataSection = attr.Factory(DataSection)
    synth: SynthSpec = attr.Factory(SynthSpec)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> "RunConfig":
        data = data or {}
        if not isinstance(data, Mapping):
            raise ConfigValidationError("Configuration root must be a mapping.")
        _ensure_known_keys(data, allowed=SECTIONS, context="top-level")
        return cls(
            model=_build(ModelSection, data.get("model"), "model"),
            schedule=_build(ScheduleConfig, data.get("schedule"), "schedule"),
            train=_build(TrainConfig, data.get("train"), "train"),
            data=_build(DataSection, data.get("data"), "data"),
            synth=_synth_from_dict(data.get("synth")),
        )

    def to_dict(self) -> dict[str, Any]:
        model = attr.asdict(self.model)
        model["encoder_layers"] = list(self.model.encoder_layers)
        data = attr.asdict(self.data)
        for key in ("label_columns", "regression_columns"):
            data[key] = None if data[key] is None else list(data[key])
        return {
            "model": model,
            "schedule": self.schedule.to_dict(),
            "train": self.train.to_dict(),
            "data": data,
            "synth": self.synth.to_dict(),
        }

    def with_overrides(self, overrides: Mapping[str, Any] | None) -> "RunConfig":
        if not overrides:
            return self
        return RunConfig.from_dict(_deep_merge(self.to_dict(), overrides))

    def with_seed(self, seed: int) -> "RunConfig":
        """Same configuration with model initialisation and training seeded by `seed`."""
        return self.with_overrides({"model": {"seed": seed}, "train": {"seed": seed}})

    def model_config(self, tasks: Iterable[TaskSpec], d: int) -> ModelConfig:
        try:
            return ModelConfig(
                d=d,
                k_final=self.model.k_final,
                tasks=tuple(tasks),
                encoder_layers=self.model.encoder_layers,
                latent_dim=self.model.latent_dim,
                schedule=self.schedule,
                noise_scale0=self.model.noise_scale0,
                seed=self.model.seed,
            )
        except (ToppanelError, TypeError) as exc:
            raise ConfigValidationError(f"Invalid 'model' section: {exc}") from exc
