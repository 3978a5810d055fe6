import numpy as np
import pytest

from spmf.augment import (
    AugmentConfig,
    augment_image,
    extract_window,
    flip_horizontal,
    gaussian_blur,
    random_crop,
    replica_rng,
)
from spmf.encoder import SpmfImage


def image_from(pixels):
    pixels = np.asarray(pixels, dtype=np.uint8)
    return SpmfImage(width=pixels.shape[1], height=pixels.shape[0], pixels=pixels)


def random_image(rng, h=36, w=36):
    return image_from(rng.integers(0, 256, size=(h, w, 3)))


class ForcedRng:
    """Stands in for a Generator, returning scripted draws."""

    def __init__(self, ints=(), uniforms=()):
        self._ints = list(ints)
        self._uniforms = list(uniforms)

    def integers(self, low, high):
        return self._ints.pop(0)

    def uniform(self):
        return self._uniforms.pop(0)


def test_config_validation():
    with pytest.raises(ValueError):
        AugmentConfig(crop_fraction=0.0)
    with pytest.raises(ValueError):
        AugmentConfig(flip_probability=1.5)
    with pytest.raises(ValueError):
        AugmentConfig(gaussian_sigma=-0.1)


def test_full_frame_crop_is_identity():
    img = random_image(np.random.default_rng(0))
    cfg = AugmentConfig(crop_fraction=1.0)
    out = random_crop(img, cfg, np.random.default_rng(1))
    assert np.array_equal(out.pixels, img.pixels)


def test_crop_window_index_arithmetic():
    img = random_image(np.random.default_rng(1), 36, 36)
    window = extract_window(img, 2, 2, 32, 32)
    assert np.array_equal(window.pixels, img.pixels[2:34, 2:34])


def test_random_crop_uses_drawn_offsets():
    img = random_image(np.random.default_rng(2), 36, 36)
    cfg = AugmentConfig(crop_fraction=32 / 36)
    out = random_crop(img, cfg, ForcedRng(ints=[2, 2]))
    from spmf.encoder import resize_array

    expected = resize_array(np.ascontiguousarray(img.pixels[2:34, 2:34]), 36, 36)
    assert np.array_equal(out.pixels, expected)


def test_random_crop_deterministic_per_seed():
    img = random_image(np.random.default_rng(3))
    cfg = AugmentConfig(crop_fraction=0.8)
    a = random_crop(img, cfg, np.random.default_rng(11))
    b = random_crop(img, cfg, np.random.default_rng(11))
    assert np.array_equal(a.pixels, b.pixels)


def test_flip_is_involution():
    img = random_image(np.random.default_rng(4))
    assert np.array_equal(flip_horizontal(flip_horizontal(img)).pixels, img.pixels)


def test_flip_width_one_unchanged():
    img = image_from(np.arange(12, dtype=np.uint8).reshape(4, 1, 3))
    assert np.array_equal(flip_horizontal(img).pixels, img.pixels)


def test_flip_swaps_columns():
    a = np.zeros((2, 2, 3), dtype=np.uint8)
    a[:, 0] = 10
    a[:, 1] = 20
    out = flip_horizontal(image_from(a))
    assert np.all(out.pixels[:, 0] == 20)
    assert np.all(out.pixels[:, 1] == 10)


def test_blur_sigma_zero_identity():
    img = random_image(np.random.default_rng(5))
    assert gaussian_blur(img, 0.0) is img


def test_blur_constant_image():
    img = image_from(np.full((9, 9, 3), 77, dtype=np.uint8))
    for sigma in (0.5, 1.0, 2.5):
        assert np.all(gaussian_blur(img, sigma).pixels == 77)


def test_blur_impulse_response_sigma_one():
    # frozen from the discretized normalized kernel: k0 = 0.399050...,
    # center = round(255 * k0^2) = 41, 4-neighbors = round(255 * k0 * k1) = 25
    px = np.zeros((9, 9, 3), dtype=np.uint8)
    px[4, 4] = 255
    out = gaussian_blur(image_from(px), 1.0)
    assert tuple(out.pixels[4, 4]) == (41, 41, 41)
    assert tuple(out.pixels[4, 5]) == (25, 25, 25)
    assert tuple(out.pixels[3, 4]) == (25, 25, 25)


def test_blur_rejects_negative_sigma():
    with pytest.raises(ValueError):
        gaussian_blur(random_image(np.random.default_rng(6)), -0.5)


def test_augment_preserves_dimensions_and_range():
    rng = np.random.default_rng(7)
    img = random_image(rng, 32, 32)
    cfg = AugmentConfig(crop_fraction=0.9, flip_probability=0.5, gaussian_sigma=0.7)
    for replica in range(5):
        out = augment_image(img, cfg, replica_rng(0, "sample", replica))
        assert (out.width, out.height) == (32, 32)
        assert out.pixels.dtype == np.uint8


def test_augmented_corpus_reproducible():
    img = random_image(np.random.default_rng(8))
    cfg = AugmentConfig(seed=5)
    for replica in (1, 2, 3):
        a = augment_image(img, cfg, replica_rng(cfg.seed, "s01", replica))
        b = augment_image(img, cfg, replica_rng(cfg.seed, "s01", replica))
        assert np.array_equal(a.pixels, b.pixels)


def test_replica_rngs_are_independent():
    draws = {
        (sid, rep): replica_rng(9, sid, rep).integers(0, 1 << 30)
        for sid in ("a", "b")
        for rep in (1, 2)
    }
    assert len(set(draws.values())) == len(draws)
