"""
Module: `toppanel.autodiff.ops`

Differentiable operations over `Tensor`.

Every public function evaluates its result eagerly with numpy and, when a tape is active and an
input requires a gradient, records a backward rule on that tape.

Functions
---------
matmul(a, b)
    Matrix product of two 2-D tensors.
softmax_rows(x), log_softmax_rows(x)
    Row-wise (log-)softmax, stabilised by subtracting the row maximum.
elementwise(kind, a, b=None, factor=None)
    Pointwise add/sub/mul/relu/neg/abs/scale with row broadcasting.
reduce(kind, x, axis=None)
    Sum or mean over all entries or one axis.
reshape(x, shape)
    Same values, new shape.
stop_gradient(x)
    Same values, no gradient path.
"""

from __future__ import annotations

from typing import Literal, Sequence

import numpy as np
from numpy.typing import NDArray

from toppanel.autodiff.tensor import BackwardRule, Tensor, active_tape
from toppanel.exceptions import DimensionError

ElementwiseKind = Literal["add", "sub", "mul", "relu", "neg", "abs", "scale"]
ReduceKind = Literal["sum", "mean"]

BINARY_KINDS: frozenset[str] = frozenset({"add", "sub", "mul"})
UNARY_KINDS: frozenset[str] = frozenset({"relu", "neg", "abs", "scale"})


def _emit(
    op: str,
    inputs: tuple[Tensor, ...],
    values: NDArray[np.float64],
    backward: BackwardRule,
) -> Tensor:
    tape = active_tape()
    tracked = tape is not None and any(tensor.requires_grad for tensor in inputs)
    out = Tensor(values, requires_grad=tracked)
    if tracked:
        assert tape is not None
        tape.record(op, inputs, out, backward)
    return out


# --- Linear algebra -------------------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product ``a @ b`` of an N×K and a K×M tensor.

    Raises
    ------
    DimensionError
        If either operand is not 2-D or the inner dimensions differ.
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul", a.shape, b.shape)
    a_values, b_values = a.values, b.values

    def backward(grad: NDArray[np.float64]) -> Sequence[NDArray[np.float64] | None]:
        return grad @ b_values.T, a_values.T @ grad

    return _emit("matmul", (a, b), a_values @ b_values, backward)


# --- Softmax family -------------------------------------------------------------------------------


def softmax_rows(x: Tensor) -> Tensor:
    """
    Softmax along each row of a 2-D tensor.

    The row maximum is subtracted before exponentiation, so large logits never overflow.
    """
    if x.ndim != 2:
        raise DimensionError("softmax_rows", x.shape)
    shifted = x.values - x.values.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    probs = exps / exps.sum(axis=1, keepdims=True)

    def backward(grad: NDArray[np.float64]) -> Sequence[NDArray[np.float64] | None]:
        inner = (grad * probs).sum(axis=1, keepdims=True)
        return (probs * (grad - inner),)

    return _emit("softmax_rows", (x,), probs, backward)


def log_softmax_rows(x: Tensor) -> Tensor:
    """Log-softmax along each row of a 2-D tensor (log-sum-exp stabilised)."""
    if x.ndim != 2:
        raise DimensionError("log_softmax_rows", x.shape)
    shifted = x.values - x.values.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    out = shifted - log_norm
    probs = np.exp(out)

    def backward(grad: NDArray[np.float64]) -> Sequence[NDArray[np.float64] | None]:
        return (grad - probs * grad.sum(axis=1, keepdims=True),)

    return _emit("log_softmax_rows", (x,), out, backward)


# --- Pointwise ------------------------------------------------------------------------------------


def _check_broadcast(kind: str, a: Tensor, b: Tensor) -> None:
    """Accept equal shapes, a scalar operand, or a length-d row against an N×d matrix."""
    if a.shape == b.shape or a.ndim == 0 or b.ndim == 0:
        return
    if a.ndim == 2 and b.ndim == 1 and b.shape[0] == a.shape[1]:
        return
    if b.ndim == 2 and a.ndim == 1 and a.shape[0] == b.shape[1]:
        return
    raise DimensionError(kind, a.shape, b.shape)


def _unbroadcast(grad: NDArray[np.float64], shape: tuple[int, ...]) -> NDArray[np.float64]:
    if grad.shape == shape:
        return grad
    if len(shape) == 0:
        return np.asarray(grad.sum())
    return grad.sum(axis=0)


def elementwise(
    kind: ElementwiseKind,
    a: Tensor,
    b: Tensor | None = None,
    *,
    factor: float | None = None,
) -> Tensor:
    """
    Pointwise operation.

    Parameters
    ----------
    kind : {"add", "sub", "mul", "relu", "neg", "abs", "scale"}
        Operation. Binary kinds need `b`; ``"scale"`` needs `factor`.
    a, b : Tensor
        Operands. Shapes must be equal, or one operand is a scalar, or one is a length-d row
        broadcast against an N×d matrix.
    factor : float, optional
        Constant multiplier for ``"scale"``.

    Notes
    -----
    ``relu`` and ``abs`` use the subgradient 0 at 0.
    """
    if kind in BINARY_KINDS:
        if b is None:
            raise DimensionError(kind, a.shape)
        return _binary(kind, a, b)
    if kind not in UNARY_KINDS:
        raise ValueError(f"Unknown elementwise kind {kind!r}")
    values = a.values
    if kind == "relu":
        positive = values > 0.0
        return _emit("relu", (a,), np.where(positive, values, 0.0), lambda g: (g * positive,))
    if kind == "neg":
        return _emit("neg", (a,), -values, lambda g: (-g,))
    if kind == "abs":
        signs = np.sign(values)
        return _emit("abs", (a,), np.abs(values), lambda g: (g * signs,))
    if factor is None:
        raise ValueError("scale needs a factor")
    scale_by = float(factor)
    return _emit("scale", (a,), values * scale_by, lambda g: (g * scale_by,))


def _binary(kind: str, a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(kind, a, b)
    a_values, b_values = a.values, b.values
    a_shape, b_shape = a.shape, b.shape
    if kind == "add":
        out = a_values + b_values

        def backward(grad: NDArray[np.float64]) -> Sequence[NDArray[np.float64] | None]:
            return _unbroadcast(grad, a_shape), _unbroadcast(grad, b_shape)

    elif kind == "sub":
        out = a_values - b_values

        def backward(grad: NDArray[np.float64]) -> Sequence[NDArray[np.float64] | None]:
            return _unbroadcast(grad, a_shape), _unbroadcast(-grad, b_shape)

    else:
        out = a_values * b_values

        def backward(grad: NDArray[np.float64]) -> Sequence[NDArray[np.float64] | None]:
            return (
                _unbroadcast(grad * b_values, a_shape),
                _unbroadcast(grad * a_values, b_shape),
            )

    return _emit(kind, (a, b), out, backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    return elementwise("add", a, b)


def sub(a: Tensor, b: Tensor) -> Tensor:
    return elementwise("sub", a, b)


def mul(a: Tensor, b: Tensor) -> Tensor:
    return elementwise("mul", a, b)


def relu(a: Tensor) -> Tensor:
    return elementwise("relu", a)


def neg(a: Tensor) -> Tensor:
    return elementwise("neg", a)


def absolute(a: Tensor) -> Tensor:
    return elementwise("abs", a)


def scale(a: Tensor, factor: float) -> Tensor:
    return elementwise("scale", a, factor=factor)


# --- Reductions and shape -------------------------------------------------------------------------


def reduce(kind: ReduceKind, x: Tensor, axis: int | None = None) -> Tensor:
    """
    Sum or mean of `x`, over every entry (``axis=None``) or along one axis.

    Raises
    ------
    DimensionError
        If `axis` is outside ``[0, x.ndim)``.
    """
    if kind not in ("sum", "mean"):
        raise ValueError(f"Unknown reduction {kind!r}")
    if axis is not None and not 0 <= axis < x.ndim:
        raise DimensionError(f"reduce(axis={axis})", x.shape)
    shape = x.shape
    count = x.size if axis is None else shape[axis]
    out = x.values.sum(axis=axis)
    if kind == "mean":
        out = out / count
    weight = 1.0 / count if kind == "mean" else 1.0

    def backward(grad: NDArray[np.float64]) -> Sequence[NDArray[np.float64] | None]:
        spread = grad if axis is None else np.expand_dims(grad, axis)
        return (np.broadcast_to(spread * weight, shape).copy(),)

    return _emit(kind, (x,), np.asarray(out, dtype=np.float64), backward)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    """Return `x` with a new shape holding the same number of entries."""
    if int(np.prod(shape, dtype=np.int64)) != x.size:
        raise DimensionError("reshape", x.shape, shape)
    source_shape = x.shape
    return _emit(
        "reshape",
        (x,),
        x.values.reshape(shape),
        lambda g: (g.reshape(source_shape),),
    )


def stop_gradient(x: Tensor) -> Tensor:
    """Return the values of `x` as a constant: no gradient flows back through it."""
    return x.detach()
