"""Domain types for skeleton sequences.

All types are frozen dataclasses: once built they never change, so sequences
can be shared freely between worker threads or processes.  Coordinates stay
64-bit floats through the whole numeric pipeline; quantization to bytes only
happens at color encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Joint3:
    """One joint position in sensor space (meters)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        # normalize numpy scalars etc. so equality and repr stay plain
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)


@dataclass(frozen=True)
class SkeletonFrame:
    """An ordered tuple of joints captured at one timestamp (1-based)."""

    joints: tuple[Joint3, ...]
    timestamp_index: int
    # Per-joint tracking confidences, kept when the source format carries
    # them; never consumed by the encoder.
    confidences: tuple[float, ...] | None = None

    def is_all_zero(self) -> bool:
        return all(j.x == 0.0 and j.y == 0.0 and j.z == 0.0 for j in self.joints)


@dataclass(frozen=True)
class SkeletonSequence:
    """A labelled, ordered run of skeleton frames from one tracked body."""

    frames: tuple[SkeletonFrame, ...]
    label: int
    subject_id: int = 0
    camera_id: int = 0
    joint_count: int = 0

    def __post_init__(self):
        if self.joint_count == 0 and self.frames:
            object.__setattr__(self, "joint_count", len(self.frames[0].joints))

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def as_array(self) -> np.ndarray:
        """Coordinates as a (frames, joints, 3) float64 array."""
        return np.array(
            [[(j.x, j.y, j.z) for j in f.joints] for f in self.frames],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class ValidationIssue:
    """One rule violation or advisory flag found in a sequence."""

    severity: str  # "error" | "warning"
    rule: str
    message: str
    frame_index: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = field(default=())

    @property
    def errors(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "error")

    @property
    def warnings(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")

    def ok(self) -> bool:
        return not self.errors


def validate_sequence(seq: SkeletonSequence) -> ValidationReport:
    """Check every structural invariant of a sequence.

    The report is empty of errors iff all invariants hold.  Frames made of
    all-zero joints (Kinect tracking dropouts) are legal but flagged as
    warnings so pipeline policies can decide what to do with them.
    """
    issues: list[ValidationIssue] = []
    if seq.frame_count < 1:
        issues.append(ValidationIssue("error", "empty", "sequence has no frames"))
        return ValidationReport(tuple(issues))

    for pos, frame in enumerate(seq.frames, start=1):
        if len(frame.joints) != seq.joint_count:
            issues.append(
                ValidationIssue(
                    "error",
                    "joint-count",
                    f"joint count mismatch at frame {pos}: "
                    f"{len(frame.joints)} != {seq.joint_count}",
                    frame_index=pos,
                )
            )
        if frame.timestamp_index != pos:
            issues.append(
                ValidationIssue(
                    "error",
                    "frame-order",
                    f"frame indices not contiguous: expected {pos}, "
                    f"got {frame.timestamp_index}",
                    frame_index=pos,
                )
            )
        for jpos, joint in enumerate(frame.joints):
            if not joint.is_finite():
                issues.append(
                    ValidationIssue(
                        "error",
                        "non-finite",
                        f"non-finite coordinate at frame {pos} joint {jpos}",
                        frame_index=pos,
                    )
                )
        if frame.joints and frame.is_all_zero():
            issues.append(
                ValidationIssue(
                    "warning",
                    "all-zero",
                    f"all-zero joints at frame {pos} (possible tracking dropout)",
                    frame_index=pos,
                )
            )
    return ValidationReport(tuple(issues))
