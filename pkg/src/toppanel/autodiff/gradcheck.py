"""
Finite-difference verification of reverse-mode gradients.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from toppanel.autodiff.tensor import Tape, Tensor
from toppanel.exceptions import ContractError

ScalarFunction = Callable[[Tensor], Tensor]

RELATIVE_FLOOR: float = 1e-8


def numeric_gradient(f: ScalarFunction, x: Tensor, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences ``(f(x + eps e_i) - f(x - eps e_i)) / (2 eps)``."""
    base = x.values
    grad = np.empty_like(base)
    flat_grad = grad.reshape(-1)
    for i in range(base.size):
        plus = base.copy()
        plus.reshape(-1)[i] += eps
        minus = base.copy()
        minus.reshape(-1)[i] -= eps
        flat_grad[i] = (f(Tensor(plus)).item() - f(Tensor(minus)).item()) / (2.0 * eps)
    return grad


def analytic_gradient(f: ScalarFunction, x: Tensor) -> np.ndarray:
    """Reverse-mode gradient of `f` at `x` on a fresh tape."""
    leaf = Tensor(x.values.copy(), requires_grad=True)
    with Tape() as tape:
        out = f(leaf)
    if out.size != 1:
        raise ContractError(f"grad_check needs a scalar-valued function, got shape {out.shape}")
    if not out.requires_grad:
        return np.zeros_like(leaf.values)
    tape.backward(out)
    return leaf.grad if leaf.grad is not None else np.zeros_like(leaf.values)


def grad_check(f: ScalarFunction, x: Tensor, eps: float = 1e-5) -> float:
    """
    Compare reverse-mode and central finite-difference gradients of `f` at `x`.

    Parameters
    ----------
    f : Callable[[Tensor], Tensor]
        Scalar-valued function built from differentiable operations.
    x : Tensor
        Evaluation point. Its values are copied, never mutated.
    eps : float
        Finite-difference step, strictly positive.

    Returns
    -------
    float
        Maximum over coordinates of ``|a - n| / max(|a|, |n|, 1e-8)``.
    """
    if eps <= 0:
        raise ContractError(f"eps must be positive, got {eps}")
    analytic = analytic_gradient(f, x)
    numeric = numeric_gradient(f, x, eps)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), RELATIVE_FLOOR)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0
