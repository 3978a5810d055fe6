"""Linear softmax classifier over encoded images, trained with Adam.

Deliberately small: a single weight matrix over flattened RGB bytes scaled
to [0, 1], cross-entropy loss, bias-corrected Adam with a halving learning
rate schedule.  It exists to prove end-to-end discriminability of the
encoding and to exercise the numeric plumbing; it is not the deep model.

Training is deterministic: He-initialized weights, a counter-based
permutation per epoch, and single-threaded batch accumulation mean the same
corpus and config always give bit-identical parameters.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, TrainingError
from .pngio import read_png

_CHECKPOINT_MAGIC = b"SPMFLIN\x01"
_PROB_FLOOR = 1e-12


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

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must be in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.lr_halving_period < 1:
            raise ValueError("lr_halving_period must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")

    def lr_at(self, epoch: int) -> float:
        """Schedule: halve the initial rate after every halving period."""
        return self.learning_rate * 0.5 ** ((epoch - 1) // self.lr_halving_period)


@dataclass
class LinearModel:
    weights: np.ndarray  # (classes, input_dim) float64
    biases: np.ndarray  # (classes,) float64
    class_labels: tuple[int, ...]
    seed: int = 0

    @property
    def class_count(self) -> int:
        return self.weights.shape[0]

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]


def init_model(input_dim: int, class_labels, seed: int) -> LinearModel:
    """He-style init: zero-mean Gaussian with variance 2/input_dim."""
    rng = np.random.default_rng(seed)
    scale = np.sqrt(2.0 / input_dim)
    return LinearModel(
        weights=rng.normal(0.0, scale, size=(len(class_labels), input_dim)),
        biases=np.zeros(len(class_labels)),
        class_labels=tuple(int(c) for c in class_labels),
        seed=seed,
    )


def forward(model: LinearModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities for one input (dim,) or a batch (n, dim)."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input")
    single = x.ndim == 1
    batch = x[None, :] if single else x
    if batch.shape[1] != model.input_dim:
        raise ValueError(f"input dim {batch.shape[1]} != model dim {model.input_dim}")
    logits = batch @ model.weights.T + model.biases
    logits -= logits.max(axis=1, keepdims=True)  # shift-invariant, stable
    e = np.exp(logits)
    probs = e / e.sum(axis=1, keepdims=True)
    return probs[0] if single else probs


def cross_entropy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Mean negative log-likelihood of one-hot targets."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape or y_true.ndim != 2 or y_true.shape[0] < 1:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    clipped = np.maximum(y_pred, _PROB_FLOOR)
    return float(-np.sum(y_true * np.log(clipped)) / y_true.shape[0])


def loss_and_grads(model: LinearModel, x: np.ndarray, y_onehot: np.ndarray):
    """Cross-entropy and its analytic gradients for one batch."""
    probs = forward(model, x)
    loss = cross_entropy(y_onehot, probs)
    m = x.shape[0]
    dlogits = (probs - y_onehot) / m
    grad_w = dlogits.T @ x
    grad_b = dlogits.sum(axis=0)
    return loss, {"weights": grad_w, "biases": grad_b}


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    t: int,
    cfg: TrainConfig,
    epoch: int = 1,
):
    """One bias-corrected Adam update; returns (new params, state)."""
    if t < 1:
        raise ValueError("step index t must be >= 1")
    lr = cfg.lr_at(epoch)
    new_params = {}
    for key, theta in params.items():
        g = grads[key]
        if g.shape != theta.shape:
            raise ValueError(f"gradient shape mismatch for {key!r}")
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient for {key!r} at step {t}")
        if key not in state.m:
            state.m[key] = np.zeros_like(theta)
            state.v[key] = np.zeros_like(theta)
        state.m[key] = cfg.beta1 * state.m[key] + (1.0 - cfg.beta1) * g
        state.v[key] = cfg.beta2 * state.v[key] + (1.0 - cfg.beta2) * (g * g)
        m_hat = state.m[key] / (1.0 - cfg.beta1**t)
        v_hat = state.v[key] / (1.0 - cfg.beta2**t)
        new_params[key] = theta - lr * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return new_params, state


def load_corpus(index_path, split: str):
    """Flattened [0, 1] images and labels for one split of a corpus index.

    Index rows carrying an "error" field are skipped (they record encoding
    failures, not samples).
    """
    index_path = Path(index_path)
    base = index_path.parent
    xs, ys, sample_ids = [], [], []
    with index_path.open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            if "error" in row or row.get("split") != split:
                continue
            pixels = read_png(base / row["path"])
            xs.append(pixels.reshape(-1).astype(np.float64) / 255.0)
            ys.append(int(row["label"]))
            sample_ids.append(row["sample_id"])
    if not xs:
        raise DataError(f"no {split!r} samples in {index_path}")
    return np.stack(xs), np.array(ys, dtype=np.int64), sample_ids


def train(index_path, cfg: TrainConfig, class_labels=None):
    """Fit the linear model on the train split; returns (model, history).

    history[e] is the mean sample loss of epoch e+1.  Classes default to
    the sorted label set of the whole index (both splits) so that a label
    seen only at test time still gets an output slot.
    """
    x, y, _ = load_corpus(index_path, "train")
    if class_labels is None:
        labels = set(int(r["label"]) for r in _iter_rows(index_path) if "error" not in r)
        class_labels = tuple(sorted(labels))
    class_index = {c: i for i, c in enumerate(class_labels)}
    missing = sorted(set(class_labels) - set(int(v) for v in y))
    if missing:
        raise TrainingError(f"classes with no training samples: {missing}")

    targets = np.zeros((x.shape[0], len(class_labels)))
    for i, label in enumerate(y):
        targets[i, class_index[int(label)]] = 1.0

    model = init_model(x.shape[1], class_labels, cfg.seed)
    params = {"weights": model.weights, "biases": model.biases}
    state = AdamState()
    history: list[float] = []
    step = 0
    n = x.shape[0]
    for epoch in range(1, cfg.epochs + 1):
        perm = np.random.default_rng([cfg.seed, epoch]).permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = perm[start : start + cfg.batch_size]
            step += 1
            probe = LinearModel(params["weights"], params["biases"], model.class_labels)
            loss, grads = loss_and_grads(probe, x[batch], targets[batch])
            params, state = adam_step(params, grads, state, step, cfg, epoch=epoch)
            total += loss * batch.shape[0]
        history.append(total / n)
    return (
        LinearModel(params["weights"], params["biases"], model.class_labels, cfg.seed),
        history,
    )


def _iter_rows(index_path):
    with Path(index_path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


@dataclass
class EvalReport:
    class_labels: tuple[int, ...]
    confusion: np.ndarray  # (classes, classes) counts, rows = true label
    per_class_accuracy: tuple[float | None, ...]  # None when absent from split
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

    def format_confusion(self) -> str:
        width = max(5, *(len(str(c)) for c in self.class_labels))
        head = " " * (width + 2) + " ".join(f"{c:>{width}}" for c in self.class_labels)
        lines = [head]
        for i, label in enumerate(self.class_labels):
            cells = " ".join(f"{int(v):>{width}}" for v in self.confusion[i])
            lines.append(f"{label:>{width}} |{cells}")
        lines.append(f"average accuracy: {self.average_accuracy:.4f}")
        return "\n".join(lines)


def evaluate(model: LinearModel, index_path, split: str) -> EvalReport:
    """Argmax predictions over one split, summarized per class."""
    x, y, _ = load_corpus(index_path, split)
    class_index = {c: i for i, c in enumerate(model.class_labels)}
    unknown = sorted(set(int(v) for v in y) - set(model.class_labels))
    if unknown:
        raise DataError(f"labels outside the model's classes: {unknown}")

    probs = forward(model, x)
    preds = np.argmax(probs, axis=1)
    c = model.class_count
    confusion = np.zeros((c, c), dtype=np.int64)
    for label, pred in zip(y, preds):
        confusion[class_index[int(label)], int(pred)] += 1

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
    absent = tuple(
        model.class_labels[i] for i in range(c) if row_sums[i] == 0
    )
    return EvalReport(
        class_labels=model.class_labels,
        confusion=confusion,
        per_class_accuracy=tuple(per_class),
        average_accuracy=float(np.mean(present)) if present else 0.0,
        absent_classes=absent,
    )


def save_model(model: LinearModel, cfg: TrainConfig, path) -> None:
    """Versioned little-endian binary record plus a JSON config sidecar."""
    path = Path(path)
    c, d = model.weights.shape
    blob = bytearray(_CHECKPOINT_MAGIC)
    blob += struct.pack("<IIIq", 1, c, d, model.seed)
    blob += model.weights.astype("<f8").tobytes()
    blob += model.biases.astype("<f8").tobytes()
    path.write_bytes(bytes(blob))
    sidecar = {
        "config": {
            "learning_rate": cfg.learning_rate,
            "beta1": cfg.beta1,
            "beta2": cfg.beta2,
            "epsilon": cfg.epsilon,
            "batch_size": cfg.batch_size,
            "epochs": cfg.epochs,
            "lr_halving_period": cfg.lr_halving_period,
            "seed": cfg.seed,
        },
        "class_labels": list(model.class_labels),
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_model(path) -> tuple[LinearModel, TrainConfig]:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:8] != _CHECKPOINT_MAGIC:
        raise DataError(f"not a model checkpoint: {path}")
    version, c, d, seed = struct.unpack_from("<IIIq", blob, 8)
    if version != 1:
        raise DataError(f"unsupported checkpoint version {version}")
    offset = 8 + struct.calcsize("<IIIq")
    weights = np.frombuffer(blob, dtype="<f8", count=c * d, offset=offset).reshape(c, d)
    offset += c * d * 8
    biases = np.frombuffer(blob, dtype="<f8", count=c, offset=offset)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    cfg = TrainConfig(**sidecar["config"])
    model = LinearModel(
        weights=weights.copy(),
        biases=biases.copy(),
        class_labels=tuple(int(x) for x in sidecar["class_labels"]),
        seed=seed,
    )
    return model, cfg
