"""Matplotlib renderings of evaluation results, written straight to files.

Uses the Agg backend so rendering works headless, and pins the image
metadata so identical inputs produce byte-identical PNG files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import ClassReport, ConfusionMatrix
from .training import TrainReport

_METADATA = {"Software": "posegest"}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, metadata=_METADATA)
    plt.close(fig)
    return path


def confusion_heatmap(cm: ConfusionMatrix, path) -> Path:
    """Count heatmap with per-cell annotations, rows = true class."""
    n = cm.n_classes
    fig, ax = plt.subplots(figsize=(7.5, 6.5), constrained_layout=True)
    image = ax.imshow(cm.counts, cmap="Blues")
    fig.colorbar(image, ax=ax, label="count")
    ax.set_xticks(range(n), cm.labels, rotation=45, ha="right")
    ax.set_yticks(range(n), cm.labels)
    ax.set_xlabel("predicted class")
    ax.set_ylabel("true class")
    ax.set_title("confusion matrix")
    threshold = cm.counts.max(initial=0) / 2
    for i in range(n):
        for j in range(n):
            count = int(cm.counts[i, j])
            ax.text(
                j,
                i,
                str(count),
                ha="center",
                va="center",
                fontsize=8,
                color="white" if count > threshold else "black",
            )
    return _save(fig, path)


def metric_bars(report: ClassReport, path) -> Path:
    """Grouped per-class precision / recall / F1 bars; undefined entries marked n/a."""
    n = len(report.labels)
    x = np.arange(n)
    width = 0.27
    series = [
        ("precision", report.precision, -width),
        ("recall", report.recall, 0.0),
        ("f1", report.f1, width),
    ]
    fig, ax = plt.subplots(figsize=(9, 4.5), constrained_layout=True)
    for name, values, offset in series:
        heights = [0.0 if v is None else v for v in values]
        ax.bar(x + offset, heights, width=width, label=name)
        for i, v in enumerate(values):
            if v is None:
                ax.text(i + offset, 0.02, "n/a", ha="center", va="bottom", fontsize=7, rotation=90)
    ax.set_xticks(x, report.labels, rotation=45, ha="right")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("per-class precision, recall, and F1")
    ax.legend(loc="lower right")
    ax.grid(axis="y", alpha=0.3)
    return _save(fig, path)


def loss_curves(reports: list[TrainReport], path) -> Path:
    """Training and held-out loss per epoch, one pair of panels for all folds."""
    fig, (ax_train, ax_test) = plt.subplots(
        1, 2, figsize=(11, 4.5), sharey=True, constrained_layout=True
    )
    for report in reports:
        epochs = range(1, report.epochs_run + 1)
        ax_train.plot(epochs, report.train_losses, label=report.held_out_subject, linewidth=1.2)
        line, = ax_test.plot(
            epochs, report.heldout_losses, label=report.held_out_subject, linewidth=1.2
        )
        ax_test.plot(
            report.best_epoch,
            report.best_heldout_loss,
            marker="o",
            markersize=4,
            color=line.get_color(),
        )
    ax_train.set_title("training loss")
    ax_test.set_title("held-out loss (dot = snapshot epoch)")
    for ax in (ax_train, ax_test):
        ax.set_xlabel("epoch")
        ax.grid(alpha=0.3)
    ax_train.set_ylabel("cross-entropy")
    ax_test.legend(title="held-out subject", fontsize=8)
    return _save(fig, path)
