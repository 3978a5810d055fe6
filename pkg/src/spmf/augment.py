"""Image-level augmentation for small corpora: crop, flip, Gaussian blur.

Every operation is pure given an explicit generator, and per-sample
generators are derived by hashing (seed, sample id, replica), so an
augmented corpus is reproducible byte for byte no matter how work is
scheduled across workers.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .encoder import SpmfImage, resize_array

__all__ = [
    "AugmentConfig",
    "extract_window",
    "random_crop",
    "flip_horizontal",
    "gaussian_blur",
    "augment_image",
    "replica_rng",
]


@dataclass(frozen=True)
class AugmentConfig:
    crop_fraction: float = 0.9
    flip_probability: float = 0.5
    gaussian_sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.crop_fraction <= 1.0):
            raise ValueError(f"crop_fraction must be in (0, 1], got {self.crop_fraction}")
        if not (0.0 <= self.flip_probability <= 1.0):
            raise ValueError(
                f"flip_probability must be in [0, 1], got {self.flip_probability}"
            )
        if self.gaussian_sigma < 0.0:
            raise ValueError(f"gaussian_sigma must be >= 0, got {self.gaussian_sigma}")


def replica_rng(seed: int, sample_id: str, replica: int) -> np.random.Generator:
    """Stable per-(sample, replica) generator, independent of worker order."""
    digest = hashlib.sha256(f"{seed}:{sample_id}:{replica}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def extract_window(img: SpmfImage, x0: int, y0: int, w: int, h: int) -> SpmfImage:
    """Contiguous sub-rectangle at (x0, y0), still at its cropped size."""
    if not (0 <= x0 and 0 <= y0 and x0 + w <= img.width and y0 + h <= img.height):
        raise ValueError(f"window {w}x{h}@({x0},{y0}) outside {img.width}x{img.height}")
    return SpmfImage(
        width=w,
        height=h,
        pixels=np.ascontiguousarray(img.pixels[y0 : y0 + h, x0 : x0 + w]),
        provenance=dict(img.provenance),
    )


def random_crop(img: SpmfImage, cfg: AugmentConfig, rng: np.random.Generator) -> SpmfImage:
    """Crop a ceil(fraction * size) window at a uniform offset (x drawn
    before y), then resize back to the source dimensions."""
    w = math.ceil(cfg.crop_fraction * img.width)
    h = math.ceil(cfg.crop_fraction * img.height)
    x0 = int(rng.integers(0, img.width - w + 1))
    y0 = int(rng.integers(0, img.height - h + 1))
    window = extract_window(img, x0, y0, w, h)
    return SpmfImage(
        width=img.width,
        height=img.height,
        pixels=resize_array(window.pixels, img.width, img.height),
        provenance=dict(img.provenance),
    )


def flip_horizontal(img: SpmfImage) -> SpmfImage:
    """Mirror the x axis, which reverses time in an encoded sequence."""
    return SpmfImage(
        width=img.width,
        height=img.height,
        pixels=np.ascontiguousarray(img.pixels[:, ::-1]),
        provenance=dict(img.provenance),
    )


def _kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def gaussian_blur(img: SpmfImage, sigma: float) -> SpmfImage:
    """Separable blur with clamp-to-edge borders; sigma 0 is the identity.

    Both passes run in float64 and bytes are rounded half-up once at the
    end, so the result equals a single 2D convolution of the source.
    """
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return img
    k = _kernel(sigma)
    radius = (len(k) - 1) // 2

    acc = img.pixels.astype(np.float64)
    padded = np.pad(acc, ((0, 0), (radius, radius), (0, 0)), mode="edge")
    acc = sum(w * padded[:, i : i + img.width] for i, w in enumerate(k))
    padded = np.pad(acc, ((radius, radius), (0, 0), (0, 0)), mode="edge")
    acc = sum(w * padded[i : i + img.height, :] for i, w in enumerate(k))

    return SpmfImage(
        width=img.width,
        height=img.height,
        pixels=np.floor(acc + 0.5).astype(np.uint8),
        provenance=dict(img.provenance),
    )


def augment_image(img: SpmfImage, cfg: AugmentConfig, rng: np.random.Generator) -> SpmfImage:
    """One augmentation draw: crop, maybe flip, then blur (in that order)."""
    out = random_crop(img, cfg, rng)
    if rng.uniform() < cfg.flip_probability:
        out = flip_horizontal(out)
    return gaussian_blur(out, cfg.gaussian_sigma)
