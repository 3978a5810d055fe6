"""Training and evaluation harness.

Checkpoints are a directory: weights.h5 plus metadata.json carrying the
architecture spec and its hash, the class labels, the parameter count,
and how many epochs have completed.  Resuming verifies the spec hash and
continues epoch numbering (optimizer moments start fresh on resume).
Evaluation emits the same report schema as the linear-baseline trainer,
so downstream tooling reads either.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import keras
import numpy as np
import tensorflow as tf

from .data import ConfigurationError, class_labels_of, load_split, one_hot
from .network import NetworkSpec, build_network, spec_hash


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 256
    epochs: int = 250
    lr_halving_period: int = 20
    seed: int = 0
    deterministic: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must be in [0, 1)")
        if self.batch_size < 1 or self.epochs < 0 or self.lr_halving_period < 1:
            raise ValueError("bad batch_size/epochs/lr_halving_period")

    def lr_at(self, epoch: int) -> float:
        """1-based epoch; halve the initial rate after every period."""
        return self.learning_rate * 0.5 ** ((epoch - 1) // self.lr_halving_period)

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "lr_halving_period": self.lr_halving_period,
            "seed": self.seed,
            "deterministic": self.deterministic,
        }


class _BatchLossRecorder(keras.callbacks.Callback):
    def __init__(self):
        super().__init__()
        self.batch_losses: list[float] = []

    def on_train_batch_end(self, batch, logs=None):
        self.batch_losses.append(float(logs["loss"]))


def _seed_everything(cfg: TrainConfig):
    keras.utils.set_random_seed(cfg.seed)
    if cfg.deterministic:
        tf.config.experimental.enable_op_determinism()


def _compile(model: keras.Model, cfg: TrainConfig):
    model.compile(
        optimizer=keras.optimizers.Adam(
            learning_rate=cfg.learning_rate,
            beta_1=cfg.beta1,
            beta_2=cfg.beta2,
            epsilon=cfg.epsilon,
        ),
        loss="categorical_crossentropy",
        metrics=["accuracy"],
    )


def _metadata_path(checkpoint_dir) -> Path:
    return Path(checkpoint_dir) / "metadata.json"


def _weights_path(checkpoint_dir) -> Path:
    return Path(checkpoint_dir) / "model.weights.h5"


def save_checkpoint(model, spec, cfg, class_labels, epochs_completed, checkpoint_dir):
    checkpoint_dir = Path(checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    model.save_weights(_weights_path(checkpoint_dir))
    metadata = {
        "spec": spec.to_dict(),
        "spec_hash": spec_hash(spec),
        "class_labels": list(class_labels),
        "parameter_count": int(model.count_params()),
        "epochs_completed": int(epochs_completed),
        "config": cfg.to_dict(),
    }
    _metadata_path(checkpoint_dir).write_text(json.dumps(metadata, indent=2) + "\n")
    return metadata


def load_checkpoint(checkpoint_dir):
    """(model, metadata) rebuilt from a checkpoint directory."""
    metadata = json.loads(_metadata_path(checkpoint_dir).read_text())
    spec = NetworkSpec.from_dict(metadata["spec"])
    if spec_hash(spec) != metadata["spec_hash"]:
        raise ConfigurationError("checkpoint spec hash does not match its spec")
    model = build_network(spec, len(metadata["class_labels"]))
    model.load_weights(_weights_path(checkpoint_dir))
    return model, metadata


def train_dcnn(index_path, spec: NetworkSpec, cfg: TrainConfig, checkpoint_dir,
               resume=False):
    """Fit the network on the train split; returns (model, history dict).

    history carries per-epoch loss/accuracy plus the per-batch loss trace
    of this run.  With resume=True, weights and epoch numbering continue
    from the checkpoint (the spec hash must match).
    """
    _seed_everything(cfg)
    class_labels = class_labels_of(index_path)
    x, y, _ = load_split(index_path, "train")
    missing = sorted(set(class_labels) - set(int(v) for v in y))
    if missing:
        raise ConfigurationError(f"classes with no training samples: {missing}")
    targets = one_hot(y, class_labels)
    if tuple(x.shape[1:3]) != spec.input_size:
        raise ConfigurationError(
            f"corpus images are {x.shape[1:3]}, spec expects {spec.input_size}"
        )

    initial_epoch = 0
    history_path = Path(checkpoint_dir) / "history.json"
    past_history = {"loss": [], "accuracy": []}
    if resume:
        model, metadata = load_checkpoint(checkpoint_dir)
        if tuple(metadata["class_labels"]) != class_labels:
            raise ConfigurationError(
                f"checkpoint classes {metadata['class_labels']} != corpus {list(class_labels)}"
            )
        initial_epoch = metadata["epochs_completed"]
        if history_path.exists():
            past_history = json.loads(history_path.read_text())
    else:
        model = build_network(spec, len(class_labels))
    _compile(model, cfg)

    recorder = _BatchLossRecorder()
    scheduler = keras.callbacks.LearningRateScheduler(
        lambda epoch0: cfg.lr_at(epoch0 + 1)
    )
    fit = model.fit(
        x,
        targets,
        batch_size=cfg.batch_size,
        epochs=initial_epoch + cfg.epochs,
        initial_epoch=initial_epoch,
        shuffle=True,
        verbose=0,
        callbacks=[recorder, scheduler],
    )

    history = {
        "loss": past_history.get("loss", []) + [float(v) for v in fit.history.get("loss", [])],
        "accuracy": past_history.get("accuracy", [])
        + [float(v) for v in fit.history.get("accuracy", [])],
        "batch_losses": recorder.batch_losses,
    }
    save_checkpoint(
        model, spec, cfg, class_labels, initial_epoch + cfg.epochs, checkpoint_dir
    )
    history_path.write_text(json.dumps(history, indent=2) + "\n")
    return model, history


@dataclass
class EvalReport:
    class_labels: tuple[int, ...]
    confusion: np.ndarray
    per_class_accuracy: tuple[float | None, ...]
    average_accuracy: float
    absent_classes: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "class_labels": list(self.class_labels),
            "confusion_matrix": self.confusion.tolist(),
            "per_class_accuracy": [
                None if a is None else float(a) for a in self.per_class_accuracy
            ],
            "average_accuracy": float(self.average_accuracy),
            "absent_classes": list(self.absent_classes),
        }


def evaluate_dcnn(checkpoint_dir, index_path, split: str) -> EvalReport:
    """Argmax predictions over one split in the shared report schema."""
    model, metadata = load_checkpoint(checkpoint_dir)
    class_labels = tuple(int(c) for c in metadata["class_labels"])
    x, y, _ = load_split(index_path, split)
    unknown = sorted(set(int(v) for v in y) - set(class_labels))
    if unknown:
        raise ConfigurationError(f"labels outside the checkpoint's classes: {unknown}")

    probs = model.predict(x, verbose=0)
    preds = np.argmax(probs, axis=1)
    index = {c: i for i, c in enumerate(class_labels)}
    c = len(class_labels)
    confusion = np.zeros((c, c), dtype=np.int64)
    for label, pred in zip(y, preds):
        confusion[index[int(label)], int(pred)] += 1

    row_sums = confusion.sum(axis=1)
    per_class: list[float | None] = []
    present = []
    for i in range(c):
        if row_sums[i] == 0:
            per_class.append(None)
        else:
            acc = confusion[i, i] / row_sums[i]
            per_class.append(float(acc))
            present.append(acc)
    return EvalReport(
        class_labels=class_labels,
        confusion=confusion,
        per_class_accuracy=tuple(per_class),
        average_accuracy=float(np.mean(present)) if present else 0.0,
        absent_classes=tuple(class_labels[i] for i in range(c) if row_sums[i] == 0),
    )
