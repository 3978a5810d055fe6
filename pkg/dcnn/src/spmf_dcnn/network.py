"""Residual-inception network over 32x32x3 encoded action images.

The architecture family is named by its block counts (nA, nB, nC): three
groups of residual-inception blocks separated by two reduction stages,
with batch normalization and ELU after every convolution in the branch
paths, dropout before a softmax head, and He-initialized weights.

Each block computes y = x + P(concat(branches(x))) where P is a linear
1x1 projection back to the input width.  The projection carries no
normalization or activation and nothing follows the addition, so zeroing
P makes the block exactly the identity map; that property is asserted in
tests.  The concrete stem and branch widths below are one pinned,
deliberately desk-scale configuration (see README); accuracy targets are
therefore approximate.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import keras
from keras import layers


@dataclass(frozen=True)
class NetworkSpec:
    block_counts: tuple[int, int, int] = (2, 2, 2)
    dropout_rate: float = 0.5
    input_size: tuple[int, int] = (32, 32)

    def __post_init__(self):
        if len(self.block_counts) != 3 or any(n < 1 for n in self.block_counts):
            raise ValueError(f"block counts must be three ints >= 1, got {self.block_counts}")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if any(s < 8 for s in self.input_size):
            raise ValueError("input must be at least 8x8 for two reductions")

    @property
    def name(self) -> str:
        a, b, c = self.block_counts
        return f"inception-resnet-{a}{b}{c}"

    def to_dict(self) -> dict:
        return {
            "block_counts": list(self.block_counts),
            "dropout_rate": self.dropout_rate,
            "input_size": list(self.input_size),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NetworkSpec":
        return cls(
            block_counts=tuple(doc["block_counts"]),
            dropout_rate=float(doc["dropout_rate"]),
            input_size=tuple(doc.get("input_size", (32, 32))),
        )


def spec_hash(spec: NetworkSpec) -> str:
    blob = json.dumps(spec.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _conv_bn_elu(x, filters, kernel, name, strides=1):
    x = layers.Conv2D(
        filters,
        kernel,
        strides=strides,
        padding="same",
        use_bias=False,
        kernel_initializer="he_normal",
        name=f"{name}_conv",
    )(x)
    x = layers.BatchNormalization(name=f"{name}_bn")(x)
    return layers.Activation("elu", name=f"{name}_elu")(x)


def _residual_block(x, branches, name):
    """x + linear projection of the concatenated branch outputs."""
    width = x.shape[-1]
    mixed = layers.Concatenate(name=f"{name}_mix")(branches)
    proj = layers.Conv2D(
        width,
        1,
        padding="same",
        kernel_initializer="he_normal",
        name=f"{name}_proj",
    )(mixed)
    return layers.Add(name=f"{name}_add")([x, proj])


def _block_a(x, name):
    b0 = _conv_bn_elu(x, 16, 1, f"{name}_b0")
    b1 = _conv_bn_elu(_conv_bn_elu(x, 16, 1, f"{name}_b1a"), 16, 3, f"{name}_b1b")
    b2 = _conv_bn_elu(x, 16, 1, f"{name}_b2a")
    b2 = _conv_bn_elu(b2, 24, 3, f"{name}_b2b")
    b2 = _conv_bn_elu(b2, 32, 3, f"{name}_b2c")
    return _residual_block(x, [b0, b1, b2], name)


def _block_b(x, name):
    b0 = _conv_bn_elu(x, 48, 1, f"{name}_b0")
    b1 = _conv_bn_elu(x, 32, 1, f"{name}_b1a")
    b1 = _conv_bn_elu(b1, 36, (1, 7), f"{name}_b1b")
    b1 = _conv_bn_elu(b1, 48, (7, 1), f"{name}_b1c")
    return _residual_block(x, [b0, b1], name)


def _block_c(x, name):
    b0 = _conv_bn_elu(x, 64, 1, f"{name}_b0")
    b1 = _conv_bn_elu(x, 48, 1, f"{name}_b1a")
    b1 = _conv_bn_elu(b1, 56, (1, 3), f"{name}_b1b")
    b1 = _conv_bn_elu(b1, 64, (3, 1), f"{name}_b1c")
    return _residual_block(x, [b0, b1], name)


def _reduction_a(x):
    pool = layers.MaxPooling2D(3, strides=2, padding="same", name="redA_pool")(x)
    b1 = _conv_bn_elu(x, 64, 3, "redA_b1", strides=2)
    b2 = _conv_bn_elu(x, 24, 1, "redA_b2a")
    b2 = _conv_bn_elu(b2, 32, 3, "redA_b2b")
    b2 = _conv_bn_elu(b2, 48, 3, "redA_b2c", strides=2)
    return layers.Concatenate(name="redA_mix")([pool, b1, b2])


def _reduction_b(x):
    pool = layers.MaxPooling2D(3, strides=2, padding="same", name="redB_pool")(x)
    b1 = _conv_bn_elu(x, 32, 1, "redB_b1a")
    b1 = _conv_bn_elu(b1, 48, 3, "redB_b1b", strides=2)
    b2 = _conv_bn_elu(x, 32, 1, "redB_b2a")
    b2 = _conv_bn_elu(b2, 40, 3, "redB_b2b", strides=2)
    return layers.Concatenate(name="redB_mix")([pool, b1, b2])


def build_network(spec: NetworkSpec, class_count: int) -> keras.Model:
    """Functional model: stem, A/B/C block groups with two reductions,
    global pooling, dropout, softmax."""
    if class_count < 2:
        raise ValueError(f"need at least 2 classes, got {class_count}")
    h, w = spec.input_size
    inputs = keras.Input(shape=(h, w, 3), name="image")
    x = _conv_bn_elu(inputs, 32, 3, "stem1")
    x = _conv_bn_elu(x, 64, 3, "stem2", strides=2)

    n_a, n_b, n_c = spec.block_counts
    for i in range(n_a):
        x = _block_a(x, f"blockA{i + 1}")
    x = _reduction_a(x)
    for i in range(n_b):
        x = _block_b(x, f"blockB{i + 1}")
    x = _reduction_b(x)
    for i in range(n_c):
        x = _block_c(x, f"blockC{i + 1}")

    x = layers.GlobalAveragePooling2D(name="head_pool")(x)
    x = layers.Dropout(spec.dropout_rate, name="head_dropout")(x)
    outputs = layers.Dense(
        class_count,
        activation="softmax",
        kernel_initializer="he_normal",
        name="head_softmax",
    )(x)
    return keras.Model(inputs, outputs, name=spec.name)


def block_names(model: keras.Model) -> list[str]:
    """Residual block identifiers, derived from their Add layers."""
    return [
        layer.name[: -len("_add")]
        for layer in model.layers
        if layer.name.endswith("_add")
    ]


def zero_residual_paths(model: keras.Model) -> None:
    """Zero every block projection so each block is the identity map."""
    for layer in model.layers:
        if layer.name.endswith("_proj"):
            kernel, bias = layer.get_weights()
            layer.set_weights([kernel * 0.0, bias * 0.0])
