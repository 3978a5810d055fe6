"""Classifier math, training loop, and checkpoint tests."""

import json
import math

import numpy as np
import pytest

from spmf import DataError, TrainingError
from spmf.baseline import (
    AdamState,
    EvalReport,
    LinearModel,
    TrainConfig,
    adam_step,
    cross_entropy,
    evaluate,
    forward,
    init_model,
    load_corpus,
    load_model,
    loss_and_grads,
    save_model,
    train,
)
from spmf.pngio import write_png


def zero_model(classes=4, dim=6):
    return LinearModel(
        weights=np.zeros((classes, dim)),
        biases=np.zeros(classes),
        class_labels=tuple(range(classes)),
    )


# ----------------------------------------------------------------- forward

def test_forward_uniform_for_zero_model():
    probs = forward(zero_model(), np.ones(6))
    assert np.allclose(probs, 0.25)
    assert abs(probs.sum() - 1.0) <= 1e-9


def test_forward_dominant_bias_wins():
    model = zero_model()
    model.biases[1] = 10.0
    assert int(np.argmax(forward(model, np.zeros(6)))) == 1


def test_forward_shift_invariance():
    rng = np.random.default_rng(0)
    model = zero_model()
    model.weights[:] = rng.normal(size=model.weights.shape)
    x = rng.uniform(0, 1, size=6)
    shifted = LinearModel(
        weights=model.weights, biases=model.biases + 7.5, class_labels=model.class_labels
    )
    assert np.allclose(forward(model, x), forward(shifted, x), atol=1e-12)


def test_forward_batch_rows_sum_to_one():
    rng = np.random.default_rng(1)
    model = init_model(8, (0, 1, 2), seed=3)
    probs = forward(model, rng.uniform(0, 1, size=(32, 8)))
    assert np.all(np.abs(probs.sum(axis=1) - 1.0) <= 1e-9)


def test_forward_rejects_non_finite():
    with pytest.raises(ValueError):
        forward(zero_model(), np.array([1.0, math.nan, 0, 0, 0, 0]))


def test_forward_handles_extreme_logits():
    model = zero_model(classes=2, dim=1)
    model.weights[0, 0] = 10000.0
    probs = forward(model, np.array([1.0]))
    assert np.isfinite(probs).all()
    assert probs[0] == pytest.approx(1.0)


# ------------------------------------------------------------ cross entropy

def test_cross_entropy_uniform_is_log4():
    y = np.zeros((1, 4))
    y[0, 2] = 1.0
    assert cross_entropy(y, np.full((1, 4), 0.25)) == pytest.approx(math.log(4))


def test_cross_entropy_perfect_prediction():
    y = np.eye(3)
    assert cross_entropy(y, y) <= 1e-10


def test_cross_entropy_averages_over_samples():
    y = np.array([[1.0, 0.0], [0.0, 1.0]])
    p = np.array([[0.8, 0.2], [0.4, 0.6]])
    l1 = -math.log(0.8)
    l2 = -math.log(0.6)
    assert cross_entropy(y, p) == pytest.approx((l1 + l2) / 2)


def test_cross_entropy_shape_mismatch():
    with pytest.raises(ValueError):
        cross_entropy(np.eye(3), np.eye(4))


# ------------------------------------------------------------------- adam

CFG = TrainConfig(epochs=1)


def test_adam_zero_gradient_is_identity():
    params = {"w": np.array([1.0, -2.0, 3.0])}
    grads = {"w": np.zeros(3)}
    new, _ = adam_step(params, grads, AdamState(), t=1, cfg=CFG)
    assert np.array_equal(new["w"], params["w"])


def test_adam_first_step_size():
    params = {"w": np.array([0.0])}
    grads = {"w": np.array([1.0])}
    new, _ = adam_step(params, grads, AdamState(), t=1, cfg=CFG)
    # bias correction makes the first step ~ -lr
    assert new["w"][0] == pytest.approx(-0.001, rel=1e-6)


def test_adam_lr_schedule():
    assert CFG.lr_at(1) == 0.001
    assert CFG.lr_at(20) == 0.001
    assert CFG.lr_at(21) == 0.0005
    assert CFG.lr_at(41) == 0.00025


def test_adam_rejects_non_finite_gradient():
    params = {"w": np.zeros(2)}
    grads = {"w": np.array([1.0, math.inf])}
    with pytest.raises(TrainingError, match="step 3"):
        adam_step(params, grads, AdamState(), t=3, cfg=CFG)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(beta1=1.0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)


# ---------------------------------------------------------- gradient check

def test_analytic_gradients_match_finite_differences():
    rng = np.random.default_rng(7)
    eps = 1e-5
    probes = 0
    worst = 0.0
    for _ in range(8):
        dim, classes, batch = 5, 3, 4
        model = init_model(dim, tuple(range(classes)), seed=int(rng.integers(1 << 16)))
        x = rng.uniform(0, 1, size=(batch, dim))
        y = np.zeros((batch, classes))
        y[np.arange(batch), rng.integers(0, classes, size=batch)] = 1.0
        _, grads = loss_and_grads(model, x, y)
        flat = [("weights", i) for i in range(classes * dim)] + [
            ("biases", i) for i in range(classes)
        ]
        for key, idx in flat:
            theta = getattr(model, key)
            flat_view = theta.reshape(-1)
            orig = flat_view[idx]
            flat_view[idx] = orig + eps
            up, _ = loss_and_grads(model, x, y)
            flat_view[idx] = orig - eps
            down, _ = loss_and_grads(model, x, y)
            flat_view[idx] = orig
            numeric = (up - down) / (2 * eps)
            analytic = grads[key].reshape(-1)[idx]
            rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-8)
            worst = max(worst, rel)
            probes += 1
    assert probes >= 100
    assert worst <= 1e-4


# ------------------------------------------------------------------ corpus

PALETTE = ((200, 30, 30), (30, 30, 200), (30, 200, 30), (200, 200, 30))


def write_toy_corpus(tmp_path, per_class=4, classes=(1, 2), train_frac=0.5,
                     image_of=None):
    """Tiny corpus of constant-color images, one color per class."""
    rows = []
    for c_idx, label in enumerate(classes):
        for i in range(per_class):
            if image_of is not None:
                px = image_of(label, i)
            else:
                px = np.zeros((4, 4, 3), dtype=np.uint8)
                px[:] = PALETTE[c_idx % len(PALETTE)]
            split = "train" if i < per_class * train_frac else "test"
            rel = f"{split}/{label}/img_{label}_{i}.png"
            (tmp_path / rel).parent.mkdir(parents=True, exist_ok=True)
            write_png(tmp_path / rel, px)
            rows.append(
                {"sample_id": f"{label}_{i}", "path": rel, "label": label,
                 "split": split, "replica": 0}
            )
    index = tmp_path / "index.jsonl"
    with index.open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return index


def test_load_corpus_scales_and_filters(tmp_path):
    index = write_toy_corpus(tmp_path)
    x, y, ids = load_corpus(index, "train")
    assert x.shape == (4, 48)
    assert set(y) == {1, 2}
    assert np.all((x >= 0) & (x <= 1))
    with pytest.raises(DataError):
        load_corpus(index, "validation")


def test_train_zero_epochs_returns_init(tmp_path):
    index = write_toy_corpus(tmp_path)
    cfg = TrainConfig(epochs=0, seed=9)
    model, history = train(index, cfg)
    ref = init_model(48, (1, 2), seed=9)
    assert history == []
    assert np.array_equal(model.weights, ref.weights)
    assert np.array_equal(model.biases, ref.biases)


def test_train_separable_toy_reaches_full_accuracy(tmp_path):
    index = write_toy_corpus(tmp_path, per_class=8)
    cfg = TrainConfig(epochs=50, batch_size=4, seed=1)
    model, history = train(index, cfg)
    report = evaluate(model, index, "train")
    assert report.average_accuracy == 1.0
    assert history[-1] < history[0]


def test_train_is_deterministic(tmp_path):
    index = write_toy_corpus(tmp_path, per_class=6)
    cfg = TrainConfig(epochs=5, batch_size=4, seed=21)
    m1, h1 = train(index, cfg)
    m2, h2 = train(index, cfg)
    assert h1 == h2
    assert np.array_equal(m1.weights, m2.weights)
    assert np.array_equal(m1.biases, m2.biases)


def test_train_rejects_empty_class(tmp_path):
    # class 3 appears only in the test split
    def image_of(label, i):
        return np.full((4, 4, 3), 10 * label, dtype=np.uint8)

    index = write_toy_corpus(tmp_path, image_of=image_of)
    rows = [json.loads(l) for l in index.read_text().splitlines()]
    px = np.full((4, 4, 3), 30, dtype=np.uint8)
    rel = "test/3/img_3_0.png"
    (index.parent / rel).parent.mkdir(parents=True)
    write_png(index.parent / rel, px)
    rows.append({"sample_id": "3_0", "path": rel, "label": 3, "split": "test",
                 "replica": 0})
    with index.open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    with pytest.raises(TrainingError, match="no training samples"):
        train(index, TrainConfig(epochs=1))


# ---------------------------------------------------------------- evaluate

def test_evaluate_perfect_model(tmp_path):
    index = write_toy_corpus(tmp_path, per_class=8)
    model, _ = train(index, TrainConfig(epochs=50, batch_size=4, seed=1))
    report = evaluate(model, index, "test")
    assert report.average_accuracy == 1.0
    assert np.all(report.confusion == np.diag(np.diag(report.confusion)))
    assert report.absent_classes == ()


def test_evaluate_random_model_near_chance(tmp_path):
    rng = np.random.default_rng(3)

    def image_of(label, i):
        return rng.integers(0, 256, size=(4, 4, 3)).astype(np.uint8)

    index = write_toy_corpus(
        tmp_path, per_class=100, classes=(0, 1, 2, 3), train_frac=0.0,
        image_of=image_of,
    )
    model = init_model(48, (0, 1, 2, 3), seed=5)
    report = evaluate(model, index, "test")
    # balanced 4-class set of 400: 3 sigma of the mean of per-class
    # binomial accuracies is ~0.065, so +-0.07 around chance
    assert abs(report.average_accuracy - 0.25) <= 0.07


def test_evaluate_absent_class_excluded_from_average(tmp_path):
    index = write_toy_corpus(tmp_path, per_class=8)
    model, _ = train(index, TrainConfig(epochs=50, batch_size=4, seed=1))
    widened = LinearModel(
        weights=np.vstack([model.weights, np.full((1, 48), -100.0)]),
        biases=np.concatenate([model.biases, [-100.0]]),
        class_labels=model.class_labels + (9,),
    )
    report = evaluate(widened, index, "test")
    assert report.absent_classes == (9,)
    assert report.per_class_accuracy[-1] is None
    assert report.average_accuracy == 1.0


def test_evaluate_unknown_label_rejected(tmp_path):
    index = write_toy_corpus(tmp_path)
    model = init_model(48, (1,), seed=0)
    with pytest.raises(DataError):
        evaluate(model, index, "test")


def test_report_serialization_and_table():
    report = EvalReport(
        class_labels=(1, 2),
        confusion=np.array([[3, 1], [0, 4]]),
        per_class_accuracy=(0.75, 1.0),
        average_accuracy=0.875,
        absent_classes=(),
    )
    doc = report.to_dict()
    assert doc["average_accuracy"] == 0.875
    assert doc["confusion_matrix"] == [[3, 1], [0, 4]]
    table = report.format_confusion()
    assert "average accuracy: 0.8750" in table


# -------------------------------------------------------------- checkpoint

def test_checkpoint_roundtrip_bitexact(tmp_path):
    index = write_toy_corpus(tmp_path)
    cfg = TrainConfig(epochs=3, batch_size=2, seed=11)
    model, _ = train(index, cfg)
    path = tmp_path / "model.bin"
    save_model(model, cfg, path)
    loaded, loaded_cfg = load_model(path)
    assert np.array_equal(loaded.weights, model.weights)
    assert np.array_equal(loaded.biases, model.biases)
    assert loaded.class_labels == model.class_labels
    assert loaded_cfg == cfg


def test_checkpoint_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"\x00" * 64)
    with pytest.raises(DataError):
        load_model(path)
