"""
Module: `toppanel.data.io`

CSV ingestion and export of datasets, and the ground-truth sidecar of synthetic datasets.

File layout: a header row, one sample per row, feature columns then label columns, UTF-8, ``.``
as decimal separator. Missing label cells are empty or ``NA``.

Functions
---------
load_csv(path, label_columns=None, *, regression_columns=(), label_prefix=None) -> Dataset
write_csv(dataset, path) -> Path
write_ground_truth(path, indices) -> Path
read_ground_truth(path) -> frozenset[int]
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from toppanel.data.dataset import Dataset, LabelColumn
from toppanel.exceptions import DataError
from toppanel.model import MISSING_CLASS

logger = logging.getLogger(__name__)

MISSING_TOKENS: frozenset[str] = frozenset({"", "NA"})
DEFAULT_LABEL_PREFIX: str = "y_"
GROUND_TRUTH_FILE: str = "ground_truth.json"
_LINE_PATTERN = re.compile(r"line (\d+)")


def _read_frame(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8"
        )
    except FileNotFoundError as exc:
        raise DataError(f"CSV file not found: {path}") from exc
    except pd.errors.EmptyDataError as exc:
        raise DataError(f"CSV file is empty: {path}") from exc
    except pd.errors.ParserError as exc:
        match = _LINE_PATTERN.search(str(exc))
        row = int(match.group(1)) - 1 if match else None
        raise DataError(f"Ragged CSV {path}: {exc}", row=row) from exc


def _resolve_label_columns(
    columns: Sequence[str],
    label_columns: Sequence[str] | None,
    label_prefix: str | None,
) -> list[str]:
    if label_columns is not None:
        for name in label_columns:
            if name not in columns:
                raise DataError("unknown label column", column=name)
        return list(label_columns)
    prefix = DEFAULT_LABEL_PREFIX if label_prefix is None else label_prefix
    return [name for name in columns if name.startswith(prefix)]


def _feature_column(name: str, cells: np.ndarray) -> np.ndarray:
    try:
        values = cells.astype(np.float64)
    except ValueError:
        values = None
    if values is not None and np.all(np.isfinite(values)):
        return values
    for row, cell in enumerate(cells, start=1):
        try:
            number = float(cell)
        except ValueError:
            number = float("nan")
        if not np.isfinite(number):
            raise DataError(f"non-numeric feature value {cell!r}", row=row, column=name)
    raise DataError("non-numeric feature value", column=name)


def _parse_label_cell(cell: str) -> float:
    text = cell.strip()
    if text in MISSING_TOKENS:
        return float("nan")
    try:
        return float(text)
    except ValueError:
        return float("nan")


def _label_column(name: str, cells: Iterable[str], regression: bool) -> LabelColumn:
    parsed = np.array([_parse_label_cell(cell) for cell in cells], dtype=np.float64)
    observed = np.isfinite(parsed)
    integral = bool(np.all(parsed[observed] == np.round(parsed[observed])))
    if regression or not integral:
        return LabelColumn(name, "regression", np.where(observed, parsed, np.nan))
    valid = observed & (parsed >= 0)
    classes = np.where(valid, parsed, MISSING_CLASS).astype(np.int64)
    num_classes = max(2, int(classes.max()) + 1) if valid.any() else 2
    return LabelColumn(name, "classification", classes, num_classes)


def load_csv(
    path: Path,
    label_columns: Sequence[str] | None = None,
    *,
    regression_columns: Sequence[str] = (),
    label_prefix: str | None = None,
) -> Dataset:
    """
    Parse a rectangular numeric CSV into a dataset.

    Parameters
    ----------
    path : Path
        CSV file.
    label_columns : Sequence[str], optional
        Label column names. Defaults to every column starting with `label_prefix`.
    regression_columns : Sequence[str]
        Label columns to read as regression targets. Other label columns are classification when
        every observed value is a whole number, regression otherwise.
    label_prefix : str, optional
        Prefix identifying label columns when `label_columns` is not given (default ``"y_"``).

    Returns
    -------
    Dataset
        Dataset without split assignment. Unparseable label cells become missing labels.

    Raises
    ------
    DataError
        On ragged rows, non-numeric feature cells or unknown label columns, with coordinates.
    """
    frame = _read_frame(Path(path))
    columns = [str(name) for name in frame.columns]
    labels = _resolve_label_columns(columns, label_columns, label_prefix)
    unknown_regression = [name for name in regression_columns if name not in labels]
    if unknown_regression:
        raise DataError("regression column is not a label column", column=unknown_regression[0])
    short = frame.isna().any(axis=1).to_numpy()
    if short.any():
        row = int(np.flatnonzero(short)[0]) + 1
        raise DataError(f"Ragged CSV {path}: expected {len(columns)} fields", row=row)
    features = [name for name in columns if name not in labels]
    n = len(frame)
    X = np.empty((n, len(features)), dtype=np.float64)
    for index, name in enumerate(features):
        X[:, index] = _feature_column(name, frame[name].to_numpy(dtype=str))
    dataset = Dataset(
        X=X,
        feature_names=tuple(features),
        labels=tuple(
            _label_column(name, frame[name].tolist(), name in regression_columns)
            for name in labels
        ),
    )
    summary = dataset.summary()
    logger.info(
        "Loaded %s: N=%d d=%d label cardinalities %s",
        path,
        summary["n_samples"],
        summary["n_features"],
        summary["label_cardinalities"],
    )
    return dataset


def _format_label(column: LabelColumn) -> list[str]:
    if column.kind == "classification":
        return ["NA" if value == MISSING_CLASS else str(int(value)) for value in column.values]
    return [repr(float(value)) if np.isfinite(value) else "NA" for value in column.values]


def write_csv(dataset: Dataset, path: Path) -> Path:
    """
    Write `dataset` in the layout read by `load_csv`.

    Floats use their shortest round-trip representation, so reloading reproduces ``X`` exactly.
    Missing labels are written as ``NA``.
    """
    data = {
        name: [repr(float(value)) for value in dataset.X[:, index]]
        for index, name in enumerate(dataset.feature_names)
    }
    for column in dataset.labels:
        data[column.name] = _format_label(column)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(data, columns=list(data)).to_csv(path, index=False, encoding="utf-8")
    return path


def write_ground_truth(path: Path, indices: Iterable[int]) -> Path:
    """Write informative feature indices as a sorted JSON list."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(sorted(int(index) for index in indices)), encoding="utf-8")
    return path


def read_ground_truth(path: Path) -> frozenset[int]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"Cannot read ground truth {path}: {exc}") from exc
    if not isinstance(payload, list) or not all(isinstance(item, int) for item in payload):
        raise DataError(f"Ground truth {path} must be a JSON list of integers")
    return frozenset(payload)
