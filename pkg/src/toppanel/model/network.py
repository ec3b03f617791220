"""
Module: `toppanel.model.network`

Shared encoder and task-specific heads operating on the masked feature matrix.

Classes
-------
TaskSpec
    One supervision signal (classification or regression).
ModelConfig
    Architecture, subset size, schedules and seed.
ModelParams
    Score vector, encoder layers and per-task heads.

Functions
---------
init_params(config, rng) -> ModelParams
apply_mask(X, mask, relaxed=False) -> Tensor
encode(S_k, params) -> Tensor
predict(z, task, params) -> Tensor
forward(X, mask, params, config, relaxed=False) -> dict[str, Tensor]
"""

from __future__ import annotations

from typing import Any, Iterator, Literal, Mapping

import attr
import numpy as np

from toppanel.autodiff import Tensor, add, constant, matmul, mul, parameter, relu
from toppanel.exceptions import ContractError, DimensionError
from toppanel.selection import ScheduleConfig, SelectionMask

TaskKind = Literal["classification", "regression"]

DEFAULT_ENCODER_LAYERS: tuple[int, ...] = (128, 128)
DEFAULT_LATENT_DIM: int = 64
DEFAULT_NOISE_SCALE0: float = 0.5
SCORE_INIT_RANGE: float = 0.01


@attr.s(auto_attribs=True, frozen=True)
class TaskSpec:
    """
    One supervision signal.

    Parameters
    ----------
    name : str
        Task name, also the label column name.
    kind : {"classification", "regression"}
        Loss family: softmax cross-entropy or mean squared error.
    num_classes : int
        Number of classes (classification, >= 2).
    output_dim : int
        Number of regressed values (regression, >= 1).
    """

    name: str
    kind: TaskKind
    num_classes: int = 0
    output_dim: int = 1

    def __attrs_post_init__(self) -> None:
        if self.kind not in ("classification", "regression"):
            raise ContractError(f"task {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "classification" and self.num_classes < 2:
            raise ContractError(f"task {self.name!r}: num_classes must be >= 2")
        if self.kind == "regression" and self.output_dim < 1:
            raise ContractError(f"task {self.name!r}: output_dim must be >= 1")

    @property
    def width(self) -> int:
        """Number of head outputs."""
        return self.num_classes if self.kind == "classification" else self.output_dim

    @classmethod
    def classification(cls, name: str, num_classes: int) -> "TaskSpec":
        return cls(name=name, kind="classification", num_classes=num_classes)

    @classmethod
    def regression(cls, name: str, output_dim: int = 1) -> "TaskSpec":
        return cls(name=name, kind="regression", output_dim=output_dim)

    def to_dict(self) -> dict[str, Any]:
        return attr.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TaskSpec":
        return cls(
            name=str(data["name"]),
            kind=data["kind"],
            num_classes=int(data.get("num_classes", 0)),
            output_dim=int(data.get("output_dim", 1)),
        )


@attr.s(auto_attribs=True, frozen=True)
class ModelConfig:
    """
    Architecture and selection settings.

    Parameters
    ----------
    d : int
        Number of input features.
    k_final : int
        Size of the selected panel at the end of training.
    tasks : tuple[TaskSpec, ...]
        Supervision signals, one head each.
    encoder_layers : tuple[int, ...]
        Hidden widths of the shared encoder. Empty means a single linear layer to the latent.
    latent_dim : int
        Width of the shared representation.
    schedule : ScheduleConfig
        Temperature and subset-size annealing settings.
    noise_scale0 : float
        Initial Gumbel noise scale (annealed with the temperature, 0 at evaluation).
    seed : int
        Seed of the parameter initialisation.
    """

    d: int
    k_final: int
    tasks: tuple[TaskSpec, ...]
    encoder_layers: tuple[int, ...] = DEFAULT_ENCODER_LAYERS
    latent_dim: int = DEFAULT_LATENT_DIM
    schedule: ScheduleConfig = attr.Factory(ScheduleConfig)
    noise_scale0: float = DEFAULT_NOISE_SCALE0
    seed: int = 0

    def __attrs_post_init__(self) -> None:
        if not self.tasks:
            raise ContractError("a model needs at least one task")
        if len({task.name for task in self.tasks}) != len(self.tasks):
            raise ContractError("task names must be unique")
        if self.latent_dim < 1 or any(width < 1 for width in self.encoder_layers):
            raise ContractError("layer widths must be positive")
        if not 1 <= self.k_final <= self.d:
            raise ContractError(f"k_final must be in [1, {self.d}], got {self.k_final}")
        if self.noise_scale0 < 0:
            raise ContractError("noise_scale0 must be non-negative")

    @property
    def layer_widths(self) -> tuple[int, ...]:
        """Input, hidden and latent widths of the encoder."""
        return (self.d, *self.encoder_layers, self.latent_dim)

    def task(self, name: str) -> TaskSpec:
        for task in self.tasks:
            if task.name == name:
                return task
        raise KeyError(f"Unknown task {name!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": self.d,
            "k_final": self.k_final,
            "tasks": [task.to_dict() for task in self.tasks],
            "encoder_layers": list(self.encoder_layers),
            "latent_dim": self.latent_dim,
            "schedule": self.schedule.to_dict(),
            "noise_scale0": self.noise_scale0,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelConfig":
        return cls(
            d=int(data["d"]),
            k_final=int(data["k_final"]),
            tasks=tuple(TaskSpec.from_dict(task) for task in data["tasks"]),
            encoder_layers=tuple(int(width) for width in data["encoder_layers"]),
            latent_dim=int(data["latent_dim"]),
            schedule=ScheduleConfig(**data.get("schedule", {})),
            noise_scale0=float(data["noise_scale0"]),
            seed=int(data["seed"]),
        )


class ModelParams:
    """
    Trainable tensors of the model.

    Attributes
    ----------
    scores : Tensor
        Learnable per-feature scores, length d.
    encoder : list[tuple[Tensor, Tensor]]
        (weight, bias) per encoder layer; weights are fan_in × fan_out.
    heads : dict[str, tuple[Tensor, Tensor]]
        (weight, bias) of the linear head of each task.
    """

    def __init__(
        self,
        scores: Tensor,
        encoder: list[tuple[Tensor, Tensor]],
        heads: dict[str, tuple[Tensor, Tensor]],
    ) -> None:
        self.scores = scores
        self.encoder = encoder
        self.heads = heads

    def named_tensors(self) -> Iterator[tuple[str, Tensor]]:
        """Yield every tensor with a stable dotted name, scores first."""
        yield "scores", self.scores
        for index, (weight, bias) in enumerate(self.encoder):
            yield f"encoder.{index}.weight", weight
            yield f"encoder.{index}.bias", bias
        for name, (weight, bias) in self.heads.items():
            yield f"heads.{name}.weight", weight
            yield f"heads.{name}.bias", bias

    def zero_grad(self) -> None:
        for _, tensor in self.named_tensors():
            tensor.zero_grad()

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(tensor.values)) for _, tensor in self.named_tensors())


def _uniform_fan_in(
    rng: np.random.Generator, fan_in: int, fan_out: int
) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_params(config: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """
    Draw initial parameters.

    Scores are uniform in [-0.01, 0.01], weights uniform in ``[-sqrt(6/f), sqrt(6/f)]`` for a
    layer of fan-in ``f``, biases zero. The draw order is fixed, so one seed gives one model.
    """
    scores = parameter(rng.uniform(-SCORE_INIT_RANGE, SCORE_INIT_RANGE, size=config.d), "scores")
    widths = config.layer_widths
    encoder = []
    for index, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        encoder.append(
            (
                parameter(_uniform_fan_in(rng, fan_in, fan_out), f"encoder.{index}.weight"),
                parameter(np.zeros(fan_out), f"encoder.{index}.bias"),
            )
        )
    heads = {}
    for task in config.tasks:
        heads[task.name] = (
            parameter(_uniform_fan_in(rng, config.latent_dim, task.width), f"heads.{task.name}.weight"),
            parameter(np.zeros(task.width), f"heads.{task.name}.bias"),
        )
    return ModelParams(scores=scores, encoder=encoder, heads=heads)


def apply_mask(X: Tensor, mask: SelectionMask, relaxed: bool = False) -> Tensor:
    """
    Masked features ``S_k = X * mask`` (row-wise broadcast).

    The forward value uses the exact 0/1 mask; gradients reach the scores through the relaxed
    mask. With ``relaxed=True`` the relaxed mask is used in the forward pass too.
    """
    if X.ndim != 2 or X.shape[1] != mask.d:
        raise DimensionError("apply_mask", X.shape, (mask.d,))
    return mul(X, mask.relaxed if relaxed else mask.value)


def encode(S_k: Tensor, params: ModelParams) -> Tensor:
    """Shared encoder: linear layers with relu in between, linear last layer."""
    hidden = S_k
    last = len(params.encoder) - 1
    for index, (weight, bias) in enumerate(params.encoder):
        hidden = add(matmul(hidden, weight), bias)
        if index < last:
            hidden = relu(hidden)
    return hidden


def predict(z: Tensor, task: TaskSpec, params: ModelParams) -> Tensor:
    """Linear head of `task`: logits for classification, values for regression."""
    weight, bias = params.heads[task.name]
    if z.ndim != 2 or z.shape[1] != weight.shape[0]:
        raise DimensionError(f"predict[{task.name}]", z.shape, weight.shape)
    return add(matmul(z, weight), bias)


def forward(
    X: Tensor,
    mask: SelectionMask,
    params: ModelParams,
    config: ModelConfig,
    relaxed: bool = False,
) -> dict[str, Tensor]:
    """Masked features through the shared encoder and every head."""
    latent = encode(apply_mask(X, mask, relaxed=relaxed), params)
    return {task.name: predict(latent, task, params) for task in config.tasks}


def as_input(X: np.ndarray | Tensor) -> Tensor:
    """Wrap a feature matrix as a constant tensor."""
    return X if isinstance(X, Tensor) else constant(X)
