"""
Module: `toppanel.autodiff.tensor`

Dense float64 tensors and the dynamic tape recording differentiable operations.

Classes
-------
Tensor
    Dense 64-bit array with a gradient slot.
TapeRecord
    One recorded operation: inputs, output and the rule mapping the output gradient to input
    gradients.
Tape
    Ordered list of records, activated as a context manager and replayed in reverse by
    `backward`.

Notes
-----
Operations record themselves on the tape that is active in the current context (a
`contextvars.ContextVar`), so concurrent training runs holding disjoint tapes never interfere.
Without an active tape, operations evaluate eagerly and outputs carry no gradient.
"""

from __future__ import annotations

from contextvars import ContextVar, Token
from dataclasses import dataclass
import logging
from typing import Any, Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from toppanel.exceptions import ContractError

logger = logging.getLogger(__name__)

BackwardRule = Callable[[NDArray[np.float64]], Sequence[NDArray[np.float64] | None]]

_ACTIVE_TAPE: ContextVar["Tape | None"] = ContextVar("toppanel_active_tape", default=None)


class Tensor:
    """
    Dense float64 array carrying an optional gradient.

    Parameters
    ----------
    values : ArrayLike
        Data, converted to a C-contiguous float64 array.
    requires_grad : bool
        Whether backward passes should populate `grad` for this tensor.
    name : str, optional
        Label used in diagnostics and checkpoints.

    Attributes
    ----------
    values : NDArray[np.float64]
        Row-major data; ``values.size == prod(shape)``.
    grad : NDArray[np.float64] | None
        Accumulated gradient with the same shape as `values`, if any.
    """

    __slots__ = ("values", "requires_grad", "grad", "name")

    def __init__(self, values: ArrayLike, *, requires_grad: bool = False, name: str | None = None):
        self.values: NDArray[np.float64] = np.ascontiguousarray(values, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: NDArray[np.float64] | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.values.shape)

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return int(self.values.size)

    def item(self) -> float:
        """Return the value of a single-element tensor as a Python float."""
        if self.values.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> NDArray[np.float64]:
        """Return a copy of the values."""
        return self.values.copy()

    def zero_grad(self) -> None:
        """Reset the gradient slot to zeros."""
        self.grad = np.zeros_like(self.values)

    def accumulate_grad(self, grad: NDArray[np.float64]) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad += grad

    def detach(self) -> "Tensor":
        """Return a tensor sharing the values but excluded from differentiation."""
        return Tensor(self.values, requires_grad=False, name=self.name)

    # --- Operator sugar (delegates to toppanel.autodiff.ops) --------------------------------------

    def __add__(self, other: "Tensor") -> "Tensor":
        from toppanel.autodiff import ops

        return ops.add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        from toppanel.autodiff import ops

        return ops.sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        from toppanel.autodiff import ops

        return ops.mul(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from toppanel.autodiff import ops

        return ops.matmul(self, other)

    def __neg__(self) -> "Tensor":
        from toppanel.autodiff import ops

        return ops.neg(self)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"


@dataclass(frozen=True)
class TapeRecord:
    """Single recorded operation."""

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule


class Tape:
    """
    Dynamic record of differentiable operations.

    Use as a context manager; operations executed inside the block record themselves in order.
    The tape is rebuilt for every forward pass.

    Parameters
    ----------
    check_finite : bool
        When True, every recorded output and every propagated gradient is checked for NaN/inf
        and a `ContractError` names the offending operation.

    Examples
    --------
    >>> x = Tensor([1.0, 2.0], requires_grad=True)
    >>> with Tape() as tape:
    ...     loss = ops.reduce("sum", ops.mul(x, x))
    >>> tape.backward(loss)
    >>> x.grad
    array([2., 4.])
    """

    def __init__(self, *, check_finite: bool = False) -> None:
        self._records: list[TapeRecord] = []
        self._tokens: list[Token[Tape | None]] = []
        self.check_finite = check_finite

    def __enter__(self) -> "Tape":
        self._tokens.append(_ACTIVE_TAPE.set(self))
        return self

    def __exit__(self, *exc_info: Any) -> None:
        _ACTIVE_TAPE.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> tuple[TapeRecord, ...]:
        return tuple(self._records)

    def record(
        self,
        op: str,
        inputs: tuple[Tensor, ...],
        output: Tensor,
        backward: BackwardRule,
    ) -> None:
        if self.check_finite and not np.all(np.isfinite(output.values)):
            raise ContractError(f"{op} produced non-finite values", op=op)
        self._records.append(TapeRecord(op=op, inputs=inputs, output=output, backward=backward))

    def reset(self) -> None:
        """Drop every record."""
        self._records.clear()

    def backward(self, loss: Tensor) -> None:
        """
        Propagate d(loss)/d(.) to every reachable tensor with ``requires_grad``.

        Gradients accumulate additively into ``Tensor.grad``: calling `backward` twice on the same
        tape doubles them.

        Raises
        ------
        ContractError
            If `loss` is not a scalar, or was not produced on this tape.
        """
        if loss.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
        produced_here = any(record.output is loss for record in self._records)
        if not produced_here and not loss.requires_grad:
            raise ContractError("loss was not produced on this tape")

        tensors: dict[int, Tensor] = {id(loss): loss}
        pending: dict[int, NDArray[np.float64]] = {id(loss): np.ones_like(loss.values)}
        for record in reversed(self._records):
            grad = pending.pop(id(record.output), None)
            if grad is None:
                continue
            if record.output.requires_grad:
                record.output.accumulate_grad(grad)
            input_grads = record.backward(grad)
            for tensor, input_grad in zip(record.inputs, input_grads):
                if input_grad is None or not tensor.requires_grad:
                    continue
                if self.check_finite and not np.all(np.isfinite(input_grad)):
                    raise ContractError(f"{record.op} produced non-finite gradient", op=record.op)
                key = id(tensor)
                tensors[key] = tensor
                if key in pending:
                    pending[key] = pending[key] + input_grad
                else:
                    pending[key] = input_grad
        # Whatever remains belongs to leaves (tensors never produced by a record).
        for key, grad in pending.items():
            tensors[key].accumulate_grad(grad)
        logger.debug("backward over %d records", len(self._records))


def active_tape() -> Tape | None:
    """Return the tape recording in the current context, if any."""
    return _ACTIVE_TAPE.get()


def constant(values: ArrayLike, name: str | None = None) -> Tensor:
    """Wrap values as a tensor excluded from differentiation."""
    return Tensor(values, requires_grad=False, name=name)


def parameter(values: ArrayLike, name: str | None = None) -> Tensor:
    """Wrap values as a trainable leaf tensor."""
    return Tensor(values, requires_grad=True, name=name)
