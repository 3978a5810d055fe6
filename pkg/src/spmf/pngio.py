"""Minimal deterministic PNG reader/writer for 8-bit RGB images.

Writing avoids ancillary chunks, timestamps, and adaptive filtering (every
row uses filter 0 and one fixed zlib level), so the same pixel array always
maps to the same bytes.  Reading handles any non-interlaced 8-bit RGB/RGBA
PNG, including all five standard row filters, which is enough to consume
corpora produced here as well as images from common tools.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import FormatError

_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_ZLIB_LEVEL = 6  # pinned: output bytes are part of the determinism contract


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload))
    )


def encode_png(pixels: np.ndarray) -> bytes:
    """Serialize an (H, W, 3) uint8 array to PNG bytes."""
    if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.dtype != np.uint8:
        raise ValueError(f"expected (H, W, 3) uint8 array, got {pixels.shape} {pixels.dtype}")
    height, width = pixels.shape[:2]
    if height < 1 or width < 1:
        raise ValueError("cannot encode an empty image")
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    raw = np.concatenate(
        [np.zeros((height, 1), dtype=np.uint8), pixels.reshape(height, width * 3)],
        axis=1,
    ).tobytes()
    idat = zlib.compress(raw, _ZLIB_LEVEL)
    return _SIGNATURE + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")


def write_png(path, pixels: np.ndarray) -> None:
    Path(path).write_bytes(encode_png(pixels))


def _unfilter(raw: bytes, width: int, height: int, channels: int, path) -> np.ndarray:
    stride = width * channels
    if len(raw) != (stride + 1) * height:
        raise FormatError(
            f"decompressed size {len(raw)} != expected {(stride + 1) * height}",
            path=path,
        )
    data = np.frombuffer(raw, dtype=np.uint8).reshape(height, stride + 1)
    filters = data[:, 0]
    rows = data[:, 1:].astype(np.int64)
    out = np.zeros((height, stride), dtype=np.int64)
    for y in range(height):
        f = filters[y]
        cur = rows[y]
        prev = out[y - 1] if y > 0 else np.zeros(stride, dtype=np.int64)
        if f == 0:
            out[y] = cur
        elif f == 2:  # up
            out[y] = (cur + prev) & 0xFF
        elif f in (1, 3, 4):  # sub / average / paeth need a left-to-right scan
            line = out[y]
            for x in range(stride):
                left = line[x - channels] if x >= channels else 0
                up = prev[x]
                ul = prev[x - channels] if x >= channels else 0
                if f == 1:
                    pred = left
                elif f == 3:
                    pred = (left + up) // 2
                else:
                    p = left + up - ul
                    pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                    if pa <= pb and pa <= pc:
                        pred = left
                    elif pb <= pc:
                        pred = up
                    else:
                        pred = ul
                line[x] = (cur[x] + pred) & 0xFF
        else:
            raise FormatError(f"unsupported PNG filter type {f}", path=path)
    return out.astype(np.uint8).reshape(height, width, channels)


def decode_png(blob: bytes, path=None) -> np.ndarray:
    """Parse PNG bytes into an (H, W, 3) uint8 array (alpha is dropped)."""
    if blob[:8] != _SIGNATURE:
        raise FormatError("not a PNG file (bad signature)", path=path)
    pos = 8
    ihdr = None
    idat = bytearray()
    while pos < len(blob):
        if pos + 8 > len(blob):
            raise FormatError("truncated chunk header", path=path, offset=pos)
        length, tag = struct.unpack(">I4s", blob[pos : pos + 8])
        payload = blob[pos + 8 : pos + 8 + length]
        if len(payload) != length:
            raise FormatError("truncated chunk payload", path=path, offset=pos)
        if tag == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", payload)
        elif tag == b"IDAT":
            idat.extend(payload)
        elif tag == b"IEND":
            break
        pos += 12 + length
    if ihdr is None:
        raise FormatError("missing IHDR chunk", path=path)
    width, height, depth, color_type, _, _, interlace = ihdr
    if depth != 8 or color_type not in (2, 6) or interlace != 0:
        raise FormatError(
            f"unsupported PNG variant (depth={depth}, color={color_type}, "
            f"interlace={interlace})",
            path=path,
        )
    channels = 3 if color_type == 2 else 4
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise FormatError(f"corrupt image data: {exc}", path=path) from exc
    pixels = _unfilter(raw, width, height, channels, path)
    return np.ascontiguousarray(pixels[:, :, :3])


def read_png(path) -> np.ndarray:
    return decode_png(Path(path).read_bytes(), path=path)
