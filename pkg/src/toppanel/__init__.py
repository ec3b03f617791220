"""
Initialization logic and public interface for the `toppanel` package.

`toppanel` learns a small panel of input features jointly with a multi-task predictor: a
differentiable top-k mask over the features feeds a shared encoder and one head per label
column, and the panel size is annealed from all features down to the final budget.

Variables
---------
__version__ : str, default "0.0.0+unknown"
    Version of the package. If the package metadata is unavailable (e.g. in editable or source-only
    environments), a fallback value is provided (PEP 440 compliant).
__all__ : list
    Public objects exposed by this package.

Functions
---------
info() -> str
    Format diagnostic information about the package and platform.

Examples
--------
Train on a synthetic dataset and read the selected panel:

    >>> from toppanel import RunConfig, prepare_dataset, run_training
    >>> config = RunConfig().with_overrides({"train": {"epochs": 5}})
    >>> dataset = prepare_dataset(config)
    >>> result = run_training(config, dataset)
    >>> len(result.report.selected_indices)
    8

See Also
--------
importlib.metadata.version
    Function to retrieve the version of a package.
"""
from importlib.metadata import version, PackageNotFoundError
import platform

try:
    if __package__ is None: # erroneous script execution
        raise PackageNotFoundError
    __version__ = version(__package__)
except PackageNotFoundError:
    __version__ = "0.0.0+unknown"

from toppanel.api import (
    SeedRuns,
    TrainResult,
    prepare_dataset,
    run_ablation,
    run_baseline,
    run_evaluation,
    run_sweep,
    run_training,
)
from toppanel.config import RunConfig

__all__ = [
    "RunConfig",
    "SeedRuns",
    "TrainResult",
    "__version__",
    "info",
    "prepare_dataset",
    "run_ablation",
    "run_baseline",
    "run_evaluation",
    "run_sweep",
    "run_training",
]


def info() -> str:
    """Format diagnostic information on package and platform."""
    return f"{__package__} {__version__} | Platform: {platform.system()} Python {platform.python_version()}"
