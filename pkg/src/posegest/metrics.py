"""Confusion matrix and per-class precision/recall/F1 reporting.

Matrix orientation: rows are the true class, columns the predicted class.
Zero-denominator metrics are reported as None (an explicit undefined
marker), never NaN; macro averages skip undefined entries and say how
many were skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CLASS_LABELS


@dataclass
class ConfusionMatrix:
    """Integer count matrix, rows = true class, columns = predicted class."""

    labels: tuple[str, ...] = CLASS_LABELS
    counts: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.labels)
        if self.counts is None:
            self.counts = np.zeros((n, n), dtype=np.int64)
        else:
            counts = np.asarray(self.counts)
            if counts.shape != (n, n):
                raise ValueError(f"counts shape {counts.shape} does not match {n} labels")
            if np.any(counts < 0):
                raise ValueError("confusion matrix counts must be nonnegative")
            self.counts = counts.astype(np.int64)

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accumulate(self, true_index: int, predicted_index: int, weight: int = 1) -> None:
        """Add one observation (or `weight` identical ones)."""
        n = self.n_classes
        if not 0 <= true_index < n:
            raise ValueError(f"true class index {true_index} out of range")
        if not 0 <= predicted_index < n:
            raise ValueError(f"predicted class index {predicted_index} out of range")
        self.counts[true_index, predicted_index] += weight

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Cellwise sum, for combining per-fold matrices."""
        if other.labels != self.labels:
            raise ValueError("cannot merge confusion matrices with different labels")
        return ConfusionMatrix(self.labels, self.counts + other.counts)


@dataclass
class ClassReport:
    """Per-class precision/recall/F1 (None where undefined) plus aggregates."""

    labels: tuple[str, ...]
    precision: list[float | None]
    recall: list[float | None]
    f1: list[float | None]
    support: list[int]  # true-count per class (row sums)
    accuracy: float | None
    macro_precision: float | None
    macro_recall: float | None
    macro_f1: float | None
    undefined_precision: int  # classes skipped in the macro average
    undefined_recall: int
    undefined_f1: int

    def as_dict(self) -> dict:
        """JSON-friendly form (None survives as null)."""
        return {
            "classes": {
                label: {
                    "precision": self.precision[i],
                    "recall": self.recall[i],
                    "f1": self.f1[i],
                    "support": self.support[i],
                }
                for i, label in enumerate(self.labels)
            },
            "accuracy": self.accuracy,
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
                "skipped_undefined": {
                    "precision": self.undefined_precision,
                    "recall": self.undefined_recall,
                    "f1": self.undefined_f1,
                },
            },
        }


def _macro(values: list[float | None]) -> tuple[float | None, int]:
    defined = [v for v in values if v is not None]
    skipped = len(values) - len(defined)
    if not defined:
        return None, skipped
    return sum(defined) / len(defined), skipped


def report(cm: ConfusionMatrix) -> ClassReport:
    """Derive precision, recall, F1, and accuracy from the count matrix."""
    counts = cm.counts
    diag = np.diag(counts)
    col_sums = counts.sum(axis=0)
    row_sums = counts.sum(axis=1)

    precision: list[float | None] = []
    recall: list[float | None] = []
    f1: list[float | None] = []
    for c in range(cm.n_classes):
        p = float(diag[c] / col_sums[c]) if col_sums[c] > 0 else None
        r = float(diag[c] / row_sums[c]) if row_sums[c] > 0 else None
        precision.append(p)
        recall.append(r)
        if p is None or r is None or (p + r) == 0.0:
            f1.append(None)
        else:
            f1.append(2.0 * p * r / (p + r))

    total = cm.total
    accuracy = float(diag.sum() / total) if total > 0 else None
    macro_p, skip_p = _macro(precision)
    macro_r, skip_r = _macro(recall)
    macro_f, skip_f = _macro(f1)
    return ClassReport(
        labels=cm.labels,
        precision=precision,
        recall=recall,
        f1=f1,
        support=[int(s) for s in row_sums],
        accuracy=accuracy,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f,
        undefined_precision=skip_p,
        undefined_recall=skip_r,
        undefined_f1=skip_f,
    )


def _fmt(value: float | None) -> str:
    return "   n/a" if value is None else f"{value:.4f}"


def render_report(rep: ClassReport, cm: ConfusionMatrix) -> str:
    """Fixed-width text report: per-class table plus the labeled count matrix.

    Byte-deterministic for identical inputs.
    """
    name_w = max(len("class"), *(len(label) for label in rep.labels))
    lines = []
    header = f"{'class':<{name_w}}  {'precision':>9}  {'recall':>9}  {'f1':>9}  {'support':>7}"
    lines.append(header)
    lines.append("-" * len(header))
    for i, label in enumerate(rep.labels):
        lines.append(
            f"{label:<{name_w}}  {_fmt(rep.precision[i]):>9}  {_fmt(rep.recall[i]):>9}"
            f"  {_fmt(rep.f1[i]):>9}  {rep.support[i]:>7}"
        )
    lines.append("-" * len(header))
    lines.append(
        f"{'macro':<{name_w}}  {_fmt(rep.macro_precision):>9}  {_fmt(rep.macro_recall):>9}"
        f"  {_fmt(rep.macro_f1):>9}  {sum(rep.support):>7}"
    )
    skipped = (rep.undefined_precision, rep.undefined_recall, rep.undefined_f1)
    if any(skipped):
        lines.append(
            "macro averages skip undefined entries: "
            f"{skipped[0]} precision, {skipped[1]} recall, {skipped[2]} f1"
        )
    lines.append(f"{'accuracy':<{name_w}}  {_fmt(rep.accuracy)}")
    lines.append("")

    # Confusion matrix, rows = true, columns = predicted.
    cell_w = max(5, *(len(label) for label in cm.labels), len(str(int(cm.counts.max(initial=0)))))
    lines.append("confusion matrix (rows = true, columns = predicted)")
    lines.append(
        f"{'':<{name_w}}  " + "  ".join(f"{label:>{cell_w}}" for label in cm.labels)
    )
    for i, label in enumerate(cm.labels):
        lines.append(
            f"{label:<{name_w}}  "
            + "  ".join(f"{int(cm.counts[i, j]):>{cell_w}}" for j in range(cm.n_classes))
        )
    return "\n".join(lines) + "\n"
