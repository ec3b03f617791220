"""
Module: `toppanel.training.optimizer`

Adam with bias correction over named tensors.

Classes
-------
AdamConfig
    Learning rate, moment decay rates and epsilon.
AdamState
    Step counter and first/second moment estimates keyed by tensor name.

Functions
---------
adam_step(params, grads, state, config) -> None
    In-place parameter update.
"""

from __future__ import annotations

from typing import Mapping

import attr
import numpy as np

from toppanel.autodiff import Tensor
from toppanel.exceptions import ContractError

DEFAULT_LEARNING_RATE: float = 1e-3
DEFAULT_BETA1: float = 0.9
DEFAULT_BETA2: float = 0.999
DEFAULT_EPS: float = 1e-8


@attr.s(auto_attribs=True, frozen=True)
class AdamConfig:
    learning_rate: float = DEFAULT_LEARNING_RATE
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    eps: float = DEFAULT_EPS

    def __attrs_post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ContractError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ContractError("Adam betas must be in [0, 1)")
        if self.eps <= 0:
            raise ContractError("Adam eps must be positive")


@attr.s(auto_attribs=True)
class AdamState:
    """Zero moments and step 0 until the first update."""

    step: int = 0
    m: dict[str, np.ndarray] = attr.Factory(dict)
    v: dict[str, np.ndarray] = attr.Factory(dict)


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray | None],
    state: AdamState,
    config: AdamConfig,
) -> None:
    """
    Apply one Adam update to every tensor of `params`.

    ``theta -= lr * m_hat / (sqrt(v_hat) + eps)`` with bias-corrected moments. A missing gradient
    counts as zero.
    """
    state.step += 1
    correction1 = 1.0 - config.beta1**state.step
    correction2 = 1.0 - config.beta2**state.step
    for name, tensor in params.items():
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros_like(tensor.values)
        if name not in state.m:
            state.m[name] = np.zeros_like(tensor.values)
            state.v[name] = np.zeros_like(tensor.values)
        state.m[name] = config.beta1 * state.m[name] + (1.0 - config.beta1) * grad
        state.v[name] = config.beta2 * state.v[name] + (1.0 - config.beta2) * (grad * grad)
        m_hat = state.m[name] / correction1
        v_hat = state.v[name] / correction2
        tensor.values = tensor.values - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
