"""Skeleton pose-motion image encoding and desk-scale training tools."""

__version__ = "0.1.0"

from .encoder import (
    DistanceStats,
    FeatureColumn,
    RgbPixel,
    SpmfImage,
    build_spmf,
    cross_jjd,
    cross_jjo,
    jet_color,
    jjd,
    jjo,
    motion_feature,
    normalize_distance,
    orient_color,
    pose_feature,
    resize_image,
)
from .errors import (
    DataError,
    DegeneratePairError,
    FormatError,
    ManifestError,
    SpmfError,
    StatsError,
    TrainingError,
)
from .skeleton import (
    Joint3,
    SkeletonFrame,
    SkeletonSequence,
    ValidationIssue,
    ValidationReport,
    validate_sequence,
)

__all__ = [
    "__version__",
    "DistanceStats",
    "FeatureColumn",
    "RgbPixel",
    "SpmfImage",
    "build_spmf",
    "cross_jjd",
    "cross_jjo",
    "jet_color",
    "jjd",
    "jjo",
    "motion_feature",
    "normalize_distance",
    "orient_color",
    "pose_feature",
    "resize_image",
    "DataError",
    "DegeneratePairError",
    "FormatError",
    "ManifestError",
    "SpmfError",
    "StatsError",
    "TrainingError",
    "Joint3",
    "SkeletonFrame",
    "SkeletonSequence",
    "ValidationIssue",
    "ValidationReport",
    "validate_sequence",
]
