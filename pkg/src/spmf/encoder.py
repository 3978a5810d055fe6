"""Skeleton sequences to pose-motion color images.

A sequence of N frames becomes one RGB image with 2N-1 columns: a pose
column per frame, interleaved with a motion column per consecutive frame
pair.  A pose column stacks, top to bottom, one jet-coded pixel per
unordered joint pair (distance) and one orientation-coded pixel per pair.
A motion column does the same over the full ordered j,k grid across the
frame pair, so the j=k diagonal carries per-joint displacement.

Distances are normalized by a corpus-wide maximum before jet coding, which
makes the image invariant to global translation and (with recomputed stats)
to uniform scaling.  Coincident joints have no orientation; their slots are
filled with the nearest valid pixel in the column.  Pose columns, which are
shorter than motion columns, are padded downward by repeating their last
pixel so every column shares one height.

All rounding from real values to bytes is half-up, and all arithmetic is
float64, so the same sequence and stats always produce the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePairError, StatsError
from .skeleton import Joint3, SkeletonFrame, SkeletonSequence

__all__ = [
    "DistanceStats",
    "RgbPixel",
    "FeatureColumn",
    "SpmfImage",
    "jjd",
    "jjo",
    "cross_jjd",
    "cross_jjo",
    "normalize_distance",
    "jet_color",
    "orient_color",
    "pose_feature",
    "motion_feature",
    "build_spmf",
    "resize_image",
]


def _build_jet_table() -> np.ndarray:
    """256-level blue-to-red palette from the piecewise-linear channel maps."""
    v = np.arange(256, dtype=np.float64) / 255.0
    r = np.clip(1.5 - np.abs(4.0 * v - 3.0), 0.0, 1.0)
    g = np.clip(1.5 - np.abs(4.0 * v - 2.0), 0.0, 1.0)
    b = np.clip(1.5 - np.abs(4.0 * v - 1.0), 0.0, 1.0)
    return np.floor(np.stack([r, g, b], axis=1) * 255.0 + 0.5).astype(np.uint8)


JET_TABLE = _build_jet_table()


@dataclass(frozen=True)
class DistanceStats:
    """Corpus-wide distance range used to normalize into [0, 1]."""

    d_max: float
    source: str = ""
    d_min: float = 0.0

    def __post_init__(self):
        if self.d_min != 0.0:
            raise StatsError(f"d_min is fixed at 0, got {self.d_min}")
        if not (math.isfinite(self.d_max) and self.d_max > 0.0):
            raise StatsError(f"d_max must be finite and > 0, got {self.d_max}")


@dataclass(frozen=True)
class RgbPixel:
    r: int
    g: int
    b: int

    def __post_init__(self):
        for c in (self.r, self.g, self.b):
            if not (isinstance(c, int) and 0 <= c <= 255):
                raise ValueError(f"channel out of range: {(self.r, self.g, self.b)}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)


@dataclass(frozen=True)
class FeatureColumn:
    """One vertical pixel strip: pose of a frame or motion of a frame pair."""

    pixels: np.ndarray  # (height, 3) uint8
    kind: str  # "pose" | "motion"
    source_t: int
    source_t1: int | None = None

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class SpmfImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8
    provenance: dict = field(default_factory=dict)


def jjd(a: Joint3, b: Joint3) -> float:
    """Euclidean distance between two joints of one frame."""
    dx = a.x - b.x
    dy = a.y - b.y
    dz = a.z - b.z
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def jjo(a: Joint3, b: Joint3) -> tuple[float, float, float]:
    """Unit vector of a - b; raises for coincident joints."""
    d = jjd(a, b)
    if d == 0.0:
        raise DegeneratePairError("coincident joints have no orientation")
    return ((a.x - b.x) / d, (a.y - b.y) / d, (a.z - b.z) / d)


def cross_jjd(a: Joint3, b: Joint3) -> float:
    """Distance from joint a at frame t to joint b at frame t+1.

    Unlike the within-frame distance this is not symmetric in the joint
    roles: swapping them changes which frame each coordinate is read from.
    """
    return jjd(a, b)


def cross_jjo(a: Joint3, b: Joint3) -> tuple[float, float, float]:
    """Unit vector from joint b at frame t+1 toward joint a at frame t."""
    return jjo(a, b)


def normalize_distance(d: float, stats: DistanceStats) -> float:
    """Map a distance into [0, 1] by the corpus maximum, clamping overshoot."""
    if not (math.isfinite(stats.d_max) and stats.d_max > 0.0):
        raise StatsError(f"invalid stats: d_max={stats.d_max}")
    if d < 0.0:
        raise ValueError(f"distance must be >= 0, got {d}")
    v = d / stats.d_max
    return 0.0 if v < 0.0 else 1.0 if v > 1.0 else v


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def jet_color(v: float) -> RgbPixel:
    """Quantize v in [0, 1] to the nearest of 256 levels and look it up."""
    if not (math.isfinite(v) and 0.0 <= v <= 1.0):
        raise ValueError(f"jet input must be in [0, 1], got {v}")
    r, g, b = JET_TABLE[_round_half_up(v * 255.0)]
    return RgbPixel(int(r), int(g), int(b))


def orient_color(u) -> RgbPixel:
    """Map a unit vector's components from [-1, 1] to byte channels."""
    ux, uy, uz = (float(u[0]), float(u[1]), float(u[2]))
    norm = math.sqrt(ux * ux + uy * uy + uz * uz)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"orientation must be a unit vector, |u|={norm}")
    return RgbPixel(
        _round_half_up((ux + 1.0) / 2.0 * 255),
        _round_half_up((uy + 1.0) / 2.0 * 255),
        _round_half_up((uz + 1.0) / 2.0 * 255),
    )


def _fill_nearest_valid(pixels: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Overwrite invalid rows with the nearest valid row (ties go upward)."""
    if valid.all():
        return pixels
    idx = np.nonzero(valid)[0]
    pos = np.arange(valid.shape[0])
    right = np.searchsorted(idx, pos)  # idx[right] is the first valid >= pos
    left = right - 1
    has_left = left >= 0
    has_right = right < idx.shape[0]
    prev = idx[np.clip(left, 0, idx.shape[0] - 1)]
    nxt = idx[np.clip(right, 0, idx.shape[0] - 1)]
    dist_prev = np.where(has_left, pos - prev, np.iinfo(np.int64).max)
    dist_next = np.where(has_right, nxt - pos, np.iinfo(np.int64).max)
    chosen = np.where(dist_prev <= dist_next, prev, nxt)
    return pixels[chosen]


def _color_blocks(diff: np.ndarray, stats: DistanceStats):
    """Color a (..., pairs, 3) difference array.

    Returns (jet pixels, orientation pixels, validity) with the leading
    shape preserved.  The float expressions deliberately mirror the scalar
    operations element for element, so columns are byte-identical however
    they are batched.
    """
    dx = diff[..., 0]
    dy = diff[..., 1]
    dz = diff[..., 2]
    d = np.sqrt(dx * dx + dy * dy + dz * dz)
    v = d / stats.d_max
    np.clip(v, 0.0, 1.0, out=v)
    jets = JET_TABLE[np.floor(v * 255.0 + 0.5).astype(np.int64)]

    valid = d > 0.0
    safe_d = np.where(valid, d, 1.0)
    u = diff / safe_d[..., None]
    orients = np.floor((u + 1.0) / 2.0 * 255 + 0.5).astype(np.uint8)
    return jets, orients, valid


def _column_pixels(diff: np.ndarray, stats: DistanceStats) -> np.ndarray:
    """One column from a (pairs, 3) difference array: jets over orientations."""
    jets, orients, valid = _color_blocks(diff, stats)
    pixels = np.concatenate([jets, orients], axis=0)
    mask = np.concatenate([np.ones_like(valid), valid])
    return _fill_nearest_valid(pixels, mask)


def _frame_points(frame: SkeletonFrame) -> np.ndarray:
    return np.array([(j.x, j.y, j.z) for j in frame.joints], dtype=np.float64)


def pose_feature(frame: SkeletonFrame, stats: DistanceStats) -> FeatureColumn:
    """Pose column: one pixel per unordered joint pair, distances on top."""
    joints = len(frame.joints)
    if joints < 2:
        raise ValueError(f"pose feature needs at least 2 joints, got {joints}")
    pts = _frame_points(frame)
    jj, kk = np.triu_indices(joints, k=1)  # lexicographic (j, k), j < k
    pixels = _column_pixels(pts[jj] - pts[kk], stats)
    return FeatureColumn(pixels=pixels, kind="pose", source_t=frame.timestamp_index)


def motion_feature(
    f_t: SkeletonFrame, f_t1: SkeletonFrame, stats: DistanceStats
) -> FeatureColumn:
    """Motion column over the ordered j,k grid of a consecutive frame pair."""
    joints = len(f_t.joints)
    if len(f_t1.joints) != joints:
        raise ValueError(
            f"joint count mismatch: {joints} vs {len(f_t1.joints)}"
        )
    pts_t = _frame_points(f_t)
    pts_t1 = _frame_points(f_t1)
    jj = np.repeat(np.arange(joints), joints)  # row-major (j, k) grid
    kk = np.tile(np.arange(joints), joints)
    pixels = _column_pixels(pts_t[jj] - pts_t1[kk], stats)
    return FeatureColumn(
        pixels=pixels,
        kind="motion",
        source_t=f_t.timestamp_index,
        source_t1=f_t1.timestamp_index,
    )


def build_spmf(seq: SkeletonSequence, stats: DistanceStats) -> SpmfImage:
    """Assemble the raw image: pose and motion columns interleaved in time.

    Width is exactly 2N-1.  Height is the tallest column (twice the squared
    joint count); shorter pose columns are padded by repeating their last
    pixel downward.
    """
    n = seq.frame_count
    if n < 2:
        raise ValueError(f"need at least 2 frames for a motion column, got {n}")
    pts = seq.as_array()
    joints = pts.shape[1]

    jj_p, kk_p = np.triu_indices(joints, k=1)
    jj_m = np.repeat(np.arange(joints), joints)
    kk_m = np.tile(np.arange(joints), joints)
    p = jj_p.shape[0]
    m = joints * joints

    jets_p, orients_p, valid_p = _color_blocks(
        pts[:, jj_p] - pts[:, kk_p], stats
    )  # (n, p, 3) blocks
    jets_m, orients_m, valid_m = _color_blocks(
        pts[:-1, jj_m] - pts[1:, kk_m], stats
    )  # (n-1, m, 3) blocks

    height = 2 * m  # motion columns are the tallest: the full ordered grid
    width = 2 * n - 1
    image = np.empty((height, width, 3), dtype=np.uint8)

    image[:p, 0::2] = np.swapaxes(jets_p, 0, 1)
    image[p : 2 * p, 0::2] = np.swapaxes(orients_p, 0, 1)
    image[2 * p :, 0::2] = image[2 * p - 1, 0::2]  # pad pose tails downward
    image[:m, 1::2] = np.swapaxes(jets_m, 0, 1)
    image[m:, 1::2] = np.swapaxes(orients_m, 0, 1)

    # coincident pairs have no orientation: overwrite their slots with the
    # nearest valid pixel in the affected column
    for t in np.nonzero(~valid_p.all(axis=1))[0]:
        mask = np.concatenate([np.ones(p, dtype=bool), valid_p[t]])
        filled = _fill_nearest_valid(image[: 2 * p, 2 * t].copy(), mask)
        image[: 2 * p, 2 * t] = filled
        image[2 * p :, 2 * t] = filled[-1]
    for t in np.nonzero(~valid_m.all(axis=1))[0]:
        mask = np.concatenate([np.ones(m, dtype=bool), valid_m[t]])
        image[:, 2 * t + 1] = _fill_nearest_valid(image[:, 2 * t + 1].copy(), mask)

    provenance = {
        "label": seq.label,
        "subject_id": seq.subject_id,
        "camera_id": seq.camera_id,
        "frames": n,
        "joint_count": joints,
        "d_max": stats.d_max,
        "stats_source": stats.source,
    }
    return SpmfImage(width=width, height=height, pixels=image, provenance=provenance)


def resize_image(img: SpmfImage, out_w: int, out_h: int) -> SpmfImage:
    """Bilinear resize with pixel-center alignment, rounded half-up."""
    if out_w < 1 or out_h < 1:
        raise ValueError(f"target size must be >= 1x1, got {out_w}x{out_h}")
    if img.width < 1 or img.height < 1 or img.pixels.size == 0:
        raise ValueError("cannot resize an empty image")
    resized = resize_array(img.pixels, out_w, out_h)
    return SpmfImage(
        width=out_w, height=out_h, pixels=resized, provenance=dict(img.provenance)
    )


def resize_array(pixels: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resize of an (H, W, 3) uint8 array; see resize_image."""
    in_h, in_w = pixels.shape[:2]
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * in_w / out_w - 0.5
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * in_h / out_h - 0.5
    np.clip(xs, 0.0, in_w - 1.0, out=xs)
    np.clip(ys, 0.0, in_h - 1.0, out=ys)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    fx = (xs - x0)[None, :, None]
    fy = (ys - y0)[:, None, None]

    src = pixels.astype(np.float64)
    top = src[y0[:, None], x0[None, :]] * (1.0 - fx) + src[y0[:, None], x1[None, :]] * fx
    bot = src[y1[:, None], x0[None, :]] * (1.0 - fx) + src[y1[:, None], x1[None, :]] * fx
    out = top * (1.0 - fy) + bot * fy
    return np.floor(out + 0.5).astype(np.uint8)
