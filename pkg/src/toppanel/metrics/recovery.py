"""
Module: `toppanel.metrics.recovery`

Agreement of a selected feature panel with known informative features.
"""

from __future__ import annotations

from typing import Iterable


def selection_recovery(selected: Iterable[int], truth: Iterable[int]) -> tuple[float, float]:
    """
    Precision and recall of `selected` against `truth`.

    Precision is ``|selected ∩ truth| / |selected|`` and recall ``|selected ∩ truth| / |truth|``;
    an empty side makes the matching ratio ``NaN``.
    """
    chosen = set(int(index) for index in selected)
    informative = set(int(index) for index in truth)
    hits = len(chosen & informative)
    precision = hits / len(chosen) if chosen else float("nan")
    recall = hits / len(informative) if informative else float("nan")
    return precision, recall
