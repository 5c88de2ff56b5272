"""Acceptance suite: one test per release criterion, run with -v for a
pass/fail line apiece.

Each test states its tolerance inline. The slow one is the end-to-end
leave-one-subject-out reproduction, bounded at five minutes; everything
else is seconds. Nothing here depends on the capture client.
"""

import io
import json
import time
from pathlib import Path

import numpy as np
import pytest

from posegest import (
    DEFAULT_DIMS,
    ConfusionMatrix,
    DenseLayer,
    GestureClass,
    MlpModel,
    PoseFrame,
    SynthConfig,
    TrainConfig,
    adam_new,
    adam_step,
    backward_batch,
    cross_entropy_loss,
    forward_batch,
    generate,
    load_model,
    log_softmax,
    model_checksum,
    predict,
    read_dataset,
    report,
    run_loso,
    save_model,
    softmax,
    write_dataset,
)
from posegest.cli import main
from posegest.mlp import GradientSet
from posegest.serve import serve_stream

DATA_DIR = Path(__file__).parent / "data"


# --------------------------------------------------------------------------
# 1. Gradient oracle: every analytic partial derivative matches central
#    finite differences (h = 1e-5) with relative error < 1e-4, across 20
#    seeded random models of two shapes, in under 10 seconds.
# --------------------------------------------------------------------------

def _mean_loss(model, X, targets):
    logp = log_softmax(forward_batch(model, X))
    return float(-np.mean(logp[np.arange(len(targets)), targets]))


def test_gradient_oracle_against_finite_differences():
    h = 1e-5
    worst = 0.0
    t0 = time.perf_counter()
    for k in range(20):
        dims = (132, 16, 8) if k % 2 == 0 else (10, 8)
        seed = 1000 + k
        rng = np.random.default_rng(seed)
        model = MlpModel.initialize(dims, seed=seed)
        X = rng.normal(0.0, 1.0, (4, dims[0]))
        targets = rng.integers(0, dims[-1], 4)
        _, grads = backward_batch(model, X, targets)

        for layer_idx, layer in enumerate(model.layers):
            for kind in ("weights", "bias"):
                param = getattr(layer, kind)
                analytic = (
                    grads.weights[layer_idx] if kind == "weights" else grads.biases[layer_idx]
                )
                it = np.nditer(param, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    original = param[idx]
                    param[idx] = original + h
                    up = _mean_loss(model, X, targets)
                    param[idx] = original - h
                    down = _mean_loss(model, X, targets)
                    param[idx] = original
                    fd = (up - down) / (2.0 * h)
                    a = float(analytic[idx])
                    # relative error with a small floor so exactly-zero
                    # partials (dead ReLU units) compare by absolute size
                    rel = abs(a - fd) / max(abs(a), abs(fd), 1e-5)
                    worst = max(worst, rel)
                    assert rel < 1e-4, (
                        f"model {k} layer {layer_idx} {kind}{idx}: "
                        f"analytic {a!r} vs finite-difference {fd!r} (rel {rel:.2e})"
                    )
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"gradient check took {elapsed:.1f}s"


# --------------------------------------------------------------------------
# 2. Optimizer oracle: a 10-step trajectory on a scalar with constant
#    gradient matches an independent recurrence within 1e-12, and the
#    first step has magnitude alpha = 0.01 within 1e-6.
# --------------------------------------------------------------------------

def _recurrence(w0, g, steps, alpha=0.01, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    theta = w0
    out = []
    for t in range(1, steps + 1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        theta = theta - alpha * m_hat / (v_hat ** 0.5 + eps)
        out.append(theta)
    return out


def test_optimizer_oracle_adam_recurrence():
    w0, g = 0.5, 0.3
    model = MlpModel([DenseLayer([[w0]], [0.0])])
    state = adam_new(model)
    grads = GradientSet([np.array([[g]])], [np.array([0.0])])

    trajectory = []
    for _ in range(10):
        model, state = adam_step(state, model, grads)
        trajectory.append(float(model.layers[0].weights[0, 0]))

    expected = _recurrence(w0, g, 10)
    for step, (got, want) in enumerate(zip(trajectory, expected), start=1):
        assert abs(got - want) < 1e-12, f"step {step}: {got!r} != {want!r}"

    first_step = abs(trajectory[0] - w0)
    assert abs(first_step - 0.01) < 1e-6


# --------------------------------------------------------------------------
# 3. Loss sanity: uniform logits cost ln 8 within 1e-9; softmax rows sum
#    to 1 within 1e-12 and are shift-invariant within 1e-12.
# --------------------------------------------------------------------------

def test_loss_sanity_uniform_logits_and_softmax():
    for value in (0.0, 3.5, -20.0):
        logits = np.full(8, value)
        for target in range(8):
            assert abs(cross_entropy_loss(logits, target) - np.log(8.0)) < 1e-9

    rng = np.random.default_rng(123)
    z = rng.normal(0.0, 5.0, (64, 8))
    p = softmax(z)
    assert np.all(np.abs(p.sum(axis=1) - 1.0) < 1e-12)
    shifted = softmax(z + rng.normal(0.0, 50.0, (64, 1)))
    assert np.all(np.abs(p - shifted) < 1e-12)


# --------------------------------------------------------------------------
# 4. End-to-end reproduction: on generator defaults (seed 42, 8 subjects,
#    noise 0.02) full leave-one-subject-out training reaches F1 >= 0.8 for
#    attention, right, left, shrug, and static, while stop/yes is the most
#    confused class pair. Bounded at five minutes.
# --------------------------------------------------------------------------

def test_loso_reproduction_f1_pattern_and_stop_yes_confusion():
    t0 = time.perf_counter()
    ds = generate(SynthConfig(seed=42))
    result = run_loso(ds, TrainConfig())
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"training run took {elapsed:.0f}s"

    cm = result.pooled_confusion(ds)
    rep = report(cm)
    f1 = dict(zip(rep.labels, rep.f1))
    for name in ("attention", "right", "left", "shrug", "static"):
        assert f1[name] is not None and f1[name] >= 0.8, f"{name}: f1 {f1[name]}"

    labels = list(cm.labels)
    mass = {}
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            mass[(labels[i], labels[j])] = int(cm.counts[i, j] + cm.counts[j, i])
    stop_yes = mass.pop(("stop", "yes"))
    runner_up = max(mass.values())
    assert stop_yes > runner_up, f"stop/yes {stop_yes} vs next pair {runner_up}"


# --------------------------------------------------------------------------
# 5. Metrics oracle: hand-checked rationals for a 2x2 matrix within 1e-12,
#    and micro-precision == accuracy on 100 random matrices.
# --------------------------------------------------------------------------

def test_metrics_oracle_rationals_and_micro_precision():
    cm = ConfusionMatrix(labels=("a", "b"), counts=np.array([[5, 1], [2, 4]]))
    rep = report(cm)
    assert abs(rep.precision[0] - 5 / 7) < 1e-12
    assert abs(rep.recall[0] - 5 / 6) < 1e-12
    assert abs(rep.f1[0] - 50 / 65) < 1e-12

    rng = np.random.default_rng(99)
    checked = 0
    while checked < 100:
        k = int(rng.integers(2, 9))
        counts = rng.integers(0, 20, (k, k))
        if counts.sum() == 0:
            continue
        labels = tuple(f"c{i}" for i in range(k))
        rep = report(ConfusionMatrix(labels=labels, counts=counts))
        micro_precision = counts.trace() / counts.sum()
        assert abs(rep.accuracy - micro_precision) < 1e-12
        checked += 1


# --------------------------------------------------------------------------
# 6. Determinism: two full train runs with identical seed and flags give
#    bit-identical checkpoints and byte-identical reports.
# --------------------------------------------------------------------------

def test_training_determinism_bit_identical_artifacts(tmp_path):
    data = tmp_path / "data.jsonl"
    assert main(["synth", "--out", str(data), "--subjects", "3", "--per-class", "1",
                 "--seed", "9"]) == 0
    flags = ["--seed", "3", "--max-epochs", "40", "--patience", "40"]
    run_a, run_b = tmp_path / "a", tmp_path / "b"
    assert main(["train", "--data", str(data), "--out", str(run_a), *flags]) == 0
    assert main(["train", "--data", str(data), "--out", str(run_b), *flags]) == 0

    names = sorted(p.name for p in run_a.iterdir())
    assert names == sorted(p.name for p in run_b.iterdir())
    assert any(name.startswith("model-") for name in names)
    for name in names:
        assert (run_a / name).read_bytes() == (run_b / name).read_bytes(), name


# --------------------------------------------------------------------------
# 7. Round trips: write-read identity on 50 generated datasets, and a
#    saved+reloaded checkpoint predicts 100 random frames exactly.
# --------------------------------------------------------------------------

def test_dataset_round_trip_on_50_generated_datasets(tmp_path):
    path = tmp_path / "ds.jsonl"
    for i in range(50):
        config = SynthConfig(
            subjects=1 + i % 3,
            samples_per_class_per_subject=1 + i % 2,
            distances=((1.0,), (1.0, 4.0), (1.0, 4.0, 6.0))[i % 3],
            noise_std=(0.0, 0.01, 0.02)[i % 3],
            seed=i,
        )
        ds = generate(config)
        write_dataset(ds, path)
        back = read_dataset(path)
        assert len(back) == len(ds)
        for a, b in zip(ds, back):
            assert np.array_equal(a.frame.points, b.frame.points)
            assert a.label is b.label
            assert a.subject == b.subject
            assert a.distance_m == b.distance_m


def test_checkpoint_round_trip_preserves_predictions(tmp_path):
    model = MlpModel.initialize(DEFAULT_DIMS, seed=5)
    path = tmp_path / "model.json"
    save_model(model, path, metadata={"note": "round-trip"})
    loaded, metadata = load_model(path)
    assert metadata["note"] == "round-trip"

    rng = np.random.default_rng(17)
    for _ in range(100):
        points = np.empty((33, 4))
        points[:, :3] = rng.uniform(-0.5, 1.5, (33, 3))
        points[:, 3] = rng.uniform(0.0, 1.0, 33)
        frame = PoseFrame(points)
        gesture_a, probs_a = predict(model, frame)
        gesture_b, probs_b = predict(loaded, frame)
        assert gesture_a is gesture_b
        assert np.array_equal(probs_a, probs_b)


# --------------------------------------------------------------------------
# 8. Protocol conformance: the frozen transcript of 10 frames plus one
#    malformed line yields 10 prediction lines and 1 error line, byte-exact
#    modulo the model checksum field.
# --------------------------------------------------------------------------

def test_protocol_conformance_golden_transcript():
    model = MlpModel.initialize((132, 16, 8), seed=2026)
    checksum = model_checksum(model)
    transcript = (DATA_DIR / "transcript_input.jsonl").read_text(encoding="utf-8")
    expected = (DATA_DIR / "transcript_expected.jsonl").read_text(encoding="utf-8")

    out = io.StringIO()
    errors = serve_stream(model, checksum, io.StringIO(transcript), out)
    actual = out.getvalue().replace(checksum, "__CHECKSUM__")

    assert errors == 1
    replies = [json.loads(line) for line in actual.splitlines()]
    assert sum(r["type"] == "prediction" for r in replies) == 10
    assert sum(r["type"] == "error" for r in replies) == 1
    assert actual == expected
