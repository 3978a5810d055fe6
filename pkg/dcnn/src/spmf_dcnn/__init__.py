"""Residual-inception training harness for encoded pose-motion image corpora."""

__version__ = "0.1.0"

from .data import ConfigurationError, class_labels_of, load_split
from .network import (
    NetworkSpec,
    block_names,
    build_network,
    spec_hash,
    zero_residual_paths,
)
from .training import (
    EvalReport,
    TrainConfig,
    evaluate_dcnn,
    load_checkpoint,
    save_checkpoint,
    train_dcnn,
)

__all__ = [
    "__version__",
    "ConfigurationError",
    "class_labels_of",
    "load_split",
    "NetworkSpec",
    "block_names",
    "build_network",
    "spec_hash",
    "zero_residual_paths",
    "EvalReport",
    "TrainConfig",
    "evaluate_dcnn",
    "load_checkpoint",
    "save_checkpoint",
    "train_dcnn",
]
