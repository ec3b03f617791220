"""
Module: `toppanel.autodiff`

Minimal reverse-mode automatic differentiation over dense float64 tensors.

Modules
-------
toppanel.autodiff.tensor
    `Tensor` and the dynamic `Tape`.
toppanel.autodiff.ops
    Differentiable operations (matmul, softmax, pointwise, reductions).
toppanel.autodiff.gradcheck
    Central finite-difference gradient verification.
"""

from .gradcheck import analytic_gradient, grad_check, numeric_gradient
from .ops import (
    absolute,
    add,
    elementwise,
    log_softmax_rows,
    matmul,
    mul,
    neg,
    reduce,
    relu,
    reshape,
    scale,
    softmax_rows,
    stop_gradient,
    sub,
)
from .tensor import Tape, TapeRecord, Tensor, active_tape, constant, parameter

__all__ = [
    "Tape",
    "TapeRecord",
    "Tensor",
    "absolute",
    "active_tape",
    "add",
    "analytic_gradient",
    "constant",
    "elementwise",
    "grad_check",
    "log_softmax_rows",
    "matmul",
    "mul",
    "neg",
    "numeric_gradient",
    "parameter",
    "reduce",
    "relu",
    "reshape",
    "scale",
    "softmax_rows",
    "stop_gradient",
    "sub",
]
