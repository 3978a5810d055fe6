"""Corpus loading from the encoder pipeline's on-disk contract.

The contract is a JSON-lines index whose rows carry
{sample_id, path, label, split, replica}; paths are PNGs relative to the
index file.  Rows with an "error" field record encoding failures and are
skipped.  Images are decoded to float32 in [0, 1].
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import tensorflow as tf


class ConfigurationError(Exception):
    """Corpus, checkpoint, and spec disagree (classes, shapes, hashes)."""


def read_index(index_path) -> list[dict]:
    rows = []
    with Path(index_path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return [r for r in rows if "error" not in r]


def class_labels_of(index_path) -> tuple[int, ...]:
    """Sorted label set over the whole index (both splits)."""
    return tuple(sorted({int(r["label"]) for r in read_index(index_path)}))


def load_split(index_path, split: str):
    """(images, labels, sample_ids) for one split as numpy arrays."""
    index_path = Path(index_path)
    base = index_path.parent
    rows = [r for r in read_index(index_path) if r.get("split") == split]
    if not rows:
        raise ConfigurationError(f"no {split!r} samples in {index_path}")
    images = []
    for row in rows:
        png = tf.io.decode_png(tf.io.read_file(str(base / row["path"])), channels=3)
        images.append(png.numpy().astype(np.float32) / 255.0)
    shapes = {img.shape for img in images}
    if len(shapes) != 1:
        raise ConfigurationError(f"mixed image shapes in corpus: {sorted(shapes)}")
    labels = np.array([int(r["label"]) for r in rows], dtype=np.int64)
    return np.stack(images), labels, [r["sample_id"] for r in rows]


def one_hot(labels: np.ndarray, class_labels: tuple[int, ...]) -> np.ndarray:
    index = {c: i for i, c in enumerate(class_labels)}
    unknown = sorted(set(int(v) for v in labels) - set(class_labels))
    if unknown:
        raise ConfigurationError(f"labels outside the class set: {unknown}")
    out = np.zeros((labels.shape[0], len(class_labels)), dtype=np.float32)
    for i, label in enumerate(labels):
        out[i, index[int(label)]] = 1.0
    return out
