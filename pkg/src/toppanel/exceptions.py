"""Custom exception hierarchy for toppanel errors."""

from __future__ import annotations

from typing import Any


class ToppanelError(Exception):
    """Base exception for toppanel errors.

    Parameters
    ----------
    message : str
        Human-readable error description.
    **context : Any
        Additional context about the error (shapes, step, row, column, etc.).

    Attributes
    ----------
    context : dict[str, Any]
        Additional context passed to the exception.
    """

    exit_code: int = 1

    def __init__(self, message: str, **context: Any) -> None:
        self.context = context
        super().__init__(message)


class DimensionError(ToppanelError):
    """Raised when tensor shapes are incompatible for an operation."""

    exit_code = 2

    def __init__(self, op: str, *shapes: tuple[int, ...]) -> None:
        rendered = " and ".join(str(tuple(shape)) for shape in shapes)
        super().__init__(f"{op}: incompatible shapes {rendered}", op=op, shapes=shapes)


class ContractError(ToppanelError):
    """Raised when an operation is called outside its precondition."""

    exit_code = 2


class DataError(ToppanelError):
    """Raised when input data or labels are malformed.

    Parameters
    ----------
    message : str
        Description of the data problem.
    row : int, optional
        1-based data row (header excluded) where the problem occurred.
    column : str, optional
        Column name where the problem occurred.
    """

    exit_code = 3

    def __init__(self, message: str, *, row: int | None = None, column: str | None = None) -> None:
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} (at {', '.join(where)})"
        super().__init__(message, row=row, column=column)


class TrainingDivergenceError(ToppanelError):
    """Raised when the training loss becomes non-finite."""

    exit_code = 4

    def __init__(self, step: int, tau: float, k: int) -> None:
        super().__init__(
            f"Non-finite loss at step {step} (tau={tau:.6g}, k={k})",
            step=step,
            tau=tau,
            k=k,
        )


class CheckpointError(ToppanelError):
    """Raised when a checkpoint cannot be read or does not match the data."""

    exit_code = 5
