"""
Module: `toppanel.data`

Datasets: synthetic generation with known informative features, CSV ingestion and export,
variance pre-filtering, binarization and train/test splitting.

Modules
-------
toppanel.data.dataset
    `Dataset`, `LabelColumn` and `split`.
toppanel.data.synthetic
    `SynthSpec`, `SynthTask` and `generate_synthetic`.
toppanel.data.preprocessing
    `hvg_filter` and `binarize`.
toppanel.data.io
    `load_csv`, `write_csv` and the ground-truth sidecar.
"""

from .dataset import TEST, TRAIN, Dataset, LabelColumn, split
from .io import GROUND_TRUTH_FILE, load_csv, read_ground_truth, write_csv, write_ground_truth
from .preprocessing import binarize, feature_variances, hvg_filter
from .synthetic import SynthSpec, SynthTask, generate_synthetic

__all__ = [
    "GROUND_TRUTH_FILE",
    "TEST",
    "TRAIN",
    "Dataset",
    "LabelColumn",
    "SynthSpec",
    "SynthTask",
    "binarize",
    "feature_variances",
    "generate_synthetic",
    "hvg_filter",
    "load_csv",
    "read_ground_truth",
    "split",
    "write_csv",
    "write_ground_truth",
]
