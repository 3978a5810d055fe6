"""PNG codec tests, cross-checked against Pillow as a second implementation."""

import io
import struct
import zlib

import numpy as np
import pytest
from PIL import Image

from spmf.errors import FormatError
from spmf.pngio import decode_png, encode_png, read_png, write_png


def random_pixels(rng, h, w):
    return rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8)


def test_roundtrip():
    rng = np.random.default_rng(0)
    for h, w in ((1, 1), (3, 7), (32, 32), (50, 3)):
        px = random_pixels(rng, h, w)
        assert np.array_equal(decode_png(encode_png(px)), px)


def test_deterministic_bytes():
    px = random_pixels(np.random.default_rng(1), 16, 16)
    assert encode_png(px) == encode_png(px.copy())


def test_pillow_reads_our_output():
    px = random_pixels(np.random.default_rng(2), 20, 13)
    img = Image.open(io.BytesIO(encode_png(px)))
    assert img.mode == "RGB"
    assert np.array_equal(np.asarray(img), px)


def test_we_read_pillow_output():
    px = random_pixels(np.random.default_rng(3), 17, 9)
    buf = io.BytesIO()
    Image.fromarray(px, "RGB").save(buf, format="PNG")
    assert np.array_equal(decode_png(buf.getvalue()), px)


def _filter_rows(px, filter_type):
    """Forward PNG filtering (the encoder side our reader must invert)."""
    h, w = px.shape[:2]
    stride = w * 3
    flat = px.reshape(h, stride).astype(np.int64)
    out = bytearray()
    prev = np.zeros(stride, dtype=np.int64)
    for y in range(h):
        out.append(filter_type)
        cur = flat[y]
        for x in range(stride):
            left = cur[x - 3] if x >= 3 else 0
            up = prev[x]
            ul = prev[x - 3] if x >= 3 else 0
            if filter_type == 0:
                pred = 0
            elif filter_type == 1:
                pred = left
            elif filter_type == 2:
                pred = up
            elif filter_type == 3:
                pred = (left + up) // 2
            else:
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                pred = left if pa <= pb and pa <= pc else up if pb <= pc else ul
            out.append((cur[x] - pred) & 0xFF)
        prev = cur
    return bytes(out)


def _wrap_idat(raw, w, h):
    def chunk(tag, payload):
        return (
            struct.pack(">I", len(payload))
            + tag
            + payload
            + struct.pack(">I", zlib.crc32(tag + payload))
        )

    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(raw))
        + chunk(b"IEND", b"")
    )


@pytest.mark.parametrize("filter_type", [0, 1, 2, 3, 4])
def test_all_standard_filters_unfiltered(filter_type):
    px = random_pixels(np.random.default_rng(4 + filter_type), 9, 6)
    blob = _wrap_idat(_filter_rows(px, filter_type), 6, 9)
    assert np.array_equal(decode_png(blob), px)


def test_file_io(tmp_path):
    px = random_pixels(np.random.default_rng(9), 8, 8)
    path = tmp_path / "img.png"
    write_png(path, px)
    assert np.array_equal(read_png(path), px)


def test_rejects_garbage():
    with pytest.raises(FormatError):
        decode_png(b"not a png at all")
    with pytest.raises(FormatError):
        decode_png(b"\x89PNG\r\n\x1a\n" + b"\x00" * 4)


def test_rejects_truncated_idat():
    px = random_pixels(np.random.default_rng(10), 5, 5)
    blob = encode_png(px)
    with pytest.raises(FormatError):
        decode_png(blob[: len(blob) // 2])


def test_encode_rejects_bad_shapes():
    with pytest.raises(ValueError):
        encode_png(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        encode_png(np.zeros((4, 4, 3), dtype=np.float64))
