"""Training harness: leave-one-subject-out splits, epoch loop, early stopping.

Training is fully deterministic given (dataset, config): model init and
mini-batch shuffling draw from a PRNG seeded only by the config, and
folds run in lexicographic subject order. Updates are mini-batched
(batch_size=None requests full batch). Held-out loss is tracked every
epoch; the returned model is the snapshot from the best held-out epoch,
and training stops once that loss has not improved for `patience`
consecutive epochs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import LANDMARK_INDEX, Dataset, GestureClass, PoseFrame
from .mlp import DEFAULT_DIMS, MlpModel, backward_batch, forward_batch, log_softmax, predict
from .adam import adam_new, adam_step
from .metrics import ConfusionMatrix


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    max_epochs: int = 2000
    batch_size: int | None = 64  # None = full batch
    patience: int = 50
    normalize: bool = False
    alpha: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class Fold:
    held_out_subject: str
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]


@dataclass(frozen=True)
class SplitPlan:
    folds: tuple[Fold, ...]


@dataclass
class TrainReport:
    held_out_subject: str
    train_losses: list[float]  # mean train loss at the params entering each epoch
    heldout_losses: list[float]  # held-out loss after each epoch's updates
    best_epoch: int  # 1-based epoch whose snapshot is returned
    epochs_run: int
    model: MlpModel
    wall_time_s: float

    @property
    def best_heldout_loss(self) -> float:
        return self.heldout_losses[self.best_epoch - 1]


def loso_split(ds: Dataset) -> SplitPlan:
    """One fold per subject, lexicographic order; test = that subject's samples."""
    subjects = ds.subjects()
    if len(subjects) < 2:
        raise ValueError(f"leave-one-subject-out needs >= 2 subjects, got {len(subjects)}")
    folds = []
    for subject in subjects:
        test = tuple(i for i, s in enumerate(ds) if s.subject == subject)
        train = tuple(i for i, s in enumerate(ds) if s.subject != subject)
        folds.append(Fold(subject, train, test))
    return SplitPlan(tuple(folds))


def normalize_frame(frame: PoseFrame) -> PoseFrame:
    """Hip-centered, torso-scaled coordinates; visibility untouched.

    Translates so the hip midpoint is the origin and divides x, y, z by
    the shoulder-midpoint-to-hip-midpoint distance. Optional transform:
    raw coordinates are the default everywhere else.
    """
    pts = frame.points.copy()
    hip_mid = 0.5 * (pts[LANDMARK_INDEX["left_hip"], :3] + pts[LANDMARK_INDEX["right_hip"], :3])
    shoulder_mid = 0.5 * (
        pts[LANDMARK_INDEX["left_shoulder"], :3] + pts[LANDMARK_INDEX["right_shoulder"], :3]
    )
    torso = float(np.linalg.norm(shoulder_mid - hip_mid))
    if torso < 1e-9:
        raise ValueError("degenerate skeleton: zero shoulder-to-hip distance")
    pts[:, :3] = (pts[:, :3] - hip_mid) / torso
    return PoseFrame(pts)


def _design_matrix(ds: Dataset, indices, normalize: bool) -> tuple[np.ndarray, np.ndarray]:
    frames = []
    labels = []
    for i in indices:
        sample = ds[i]
        frame = normalize_frame(sample.frame) if normalize else sample.frame
        frames.append(frame.points.reshape(-1))
        labels.append(sample.label.index)
    return np.array(frames, dtype=np.float64), np.array(labels, dtype=np.int64)


def _mean_loss(model: MlpModel, X: np.ndarray, y: np.ndarray) -> float:
    log_probs = log_softmax(forward_batch(model, X))
    return float(-np.mean(log_probs[np.arange(len(y)), y]))


def train_fold(ds: Dataset, fold: Fold, config: TrainConfig, dims=DEFAULT_DIMS) -> TrainReport:
    """Train one fold to the early-stopping point and return the best snapshot."""
    if not fold.train_indices or not fold.test_indices:
        raise ValueError("fold has an empty train or test partition")
    started = time.perf_counter()
    X_train, y_train = _design_matrix(ds, fold.train_indices, config.normalize)
    X_test, y_test = _design_matrix(ds, fold.test_indices, config.normalize)

    rng = np.random.default_rng(config.seed)
    model = MlpModel.initialize(dims, seed=config.seed)
    state = adam_new(model, config.alpha, config.beta1, config.beta2, config.eps)

    n = len(y_train)
    train_losses: list[float] = []
    heldout_losses: list[float] = []
    best_epoch = 0
    best_loss = np.inf
    best_model = model.copy()

    for epoch in range(1, config.max_epochs + 1):
        if config.batch_size is None or config.batch_size >= n:
            loss, grads = backward_batch(model, X_train, y_train)
            model, state = adam_step(state, model, grads)
            epoch_train_loss = loss
        else:
            order = rng.permutation(n)
            batch_losses = []
            for start in range(0, n, config.batch_size):
                batch = order[start : start + config.batch_size]
                loss, grads = backward_batch(model, X_train[batch], y_train[batch])
                model, state = adam_step(state, model, grads)
                batch_losses.append(loss)
            epoch_train_loss = float(np.mean(batch_losses))

        heldout_loss = _mean_loss(model, X_test, y_test)
        train_losses.append(epoch_train_loss)
        heldout_losses.append(heldout_loss)

        if heldout_loss < best_loss:
            best_loss = heldout_loss
            best_epoch = epoch
            best_model = model.copy()
        elif epoch - best_epoch >= config.patience:
            break

    return TrainReport(
        held_out_subject=fold.held_out_subject,
        train_losses=train_losses,
        heldout_losses=heldout_losses,
        best_epoch=best_epoch,
        epochs_run=len(train_losses),
        model=best_model,
        wall_time_s=time.perf_counter() - started,
    )


@dataclass
class FoldOutcome:
    fold: Fold
    report: TrainReport
    predicted: list[GestureClass]  # one per test index, in fold order


@dataclass
class LosoResult:
    outcomes: list[FoldOutcome] = field(default_factory=list)

    def pooled_confusion(self, ds: Dataset) -> ConfusionMatrix:
        """Every sample scored once, by the fold that held its subject out."""
        cm = ConfusionMatrix()
        for outcome in self.outcomes:
            for idx, pred in zip(outcome.fold.test_indices, outcome.predicted):
                cm.accumulate(ds[idx].label.index, pred.index)
        return cm


def evaluate_fold(ds: Dataset, fold: Fold, report: TrainReport, config: TrainConfig) -> FoldOutcome:
    """Predict the fold's held-out samples with its trained model."""
    predicted = []
    for idx in fold.test_indices:
        frame = ds[idx].frame
        if config.normalize:
            frame = normalize_frame(frame)
        gesture, _ = predict(report.model, frame)
        predicted.append(gesture)
    return FoldOutcome(fold=fold, report=report, predicted=predicted)


def run_loso(
    ds: Dataset,
    config: TrainConfig,
    dims=DEFAULT_DIMS,
    only_subject: str | None = None,
    progress=None,
) -> LosoResult:
    """Train and evaluate every fold (or a single named one), in subject order."""
    plan = loso_split(ds)
    folds = plan.folds
    if only_subject is not None:
        folds = tuple(f for f in folds if f.held_out_subject == only_subject)
        if not folds:
            raise ValueError(f"no such subject in dataset: {only_subject!r}")
    result = LosoResult()
    for fold in folds:
        report = train_fold(ds, fold, config, dims)
        result.outcomes.append(evaluate_fold(ds, fold, report, config))
        if progress is not None:
            progress(fold, report)
    return result
