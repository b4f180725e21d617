"""Confusion matrices and balanced accuracy for detection and attribution.

Counts stay exact integers so partial matrices merge associatively; balanced
accuracy is computed in double precision only at report time. The attribution
metric gives the real class half the weight and splits the other half evenly
across the manipulation classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional


class EmptyClassError(ValueError):
    """A ground-truth class has no samples and strict mode is on."""


@dataclass
class ConfusionMatrix:
    """counts[true][pred], k x k, exact integer counts."""

    k: int
    counts: List[List[int]] = field(default_factory=list)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("confusion matrix needs at least 2 classes")
        if not self.counts:
            self.counts = [[0] * self.k for _ in range(self.k)]
        if len(self.counts) != self.k or any(len(row) != self.k for row in self.counts):
            raise ValueError("counts shape does not match k")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("negative count")

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def true_totals(self) -> List[int]:
        return [sum(row) for row in self.counts]

    def copy(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.k, [row[:] for row in self.counts])


def accumulate(cm: ConfusionMatrix, truth: int, pred: int) -> ConfusionMatrix:
    """Increment one cell in place and return the matrix."""
    if not (0 <= truth < cm.k):
        raise ValueError(f"truth label {truth} out of range 0..{cm.k - 1}")
    if not (0 <= pred < cm.k):
        raise ValueError(f"predicted label {pred} out of range 0..{cm.k - 1}")
    cm.counts[truth][pred] += 1
    return cm


def merge(a: ConfusionMatrix, b: ConfusionMatrix) -> ConfusionMatrix:
    """Associative, commutative merge of partial matrices."""
    if a.k != b.k:
        raise ValueError(f"cannot merge matrices with k={a.k} and k={b.k}")
    return ConfusionMatrix(
        a.k, [[a.counts[i][j] + b.counts[i][j] for j in range(a.k)] for i in range(a.k)]
    )


def per_class_recall(cm: ConfusionMatrix) -> List[Optional[float]]:
    """Recall per true class; None where the class has no samples."""
    recalls: List[Optional[float]] = []
    for i, row in enumerate(cm.counts):
        n = sum(row)
        recalls.append(None if n == 0 else row[i] / n)
    return recalls


@dataclass(frozen=True)
class MetricsReport:
    task: str  # "detection" | "attribution"
    balanced_accuracy: float
    per_class_recall: tuple
    sample_count: int
    excluded_classes: tuple = ()


def ba_detection(cm: ConfusionMatrix, strict: bool = True) -> float:
    """Equal-weight mean of real and fake recall on a 2x2 matrix."""
    if cm.k != 2:
        raise ValueError(f"detection matrix must be 2x2, got k={cm.k}")
    recalls = per_class_recall(cm)
    present = [r for r in recalls if r is not None]
    if len(present) < 2:
        if strict:
            empty = [i for i, r in enumerate(recalls) if r is None]
            raise EmptyClassError(f"no samples for true class(es) {empty}")
        if not present:
            raise EmptyClassError("empty confusion matrix")
        return present[0]
    return 0.5 * recalls[0] + 0.5 * recalls[1]


def ba_attribution(cm: ConfusionMatrix, strict: bool = True) -> float:
    """Half weight on real recall, half split evenly over manipulation recalls.

    Lenient mode drops empty classes from the average and renormalizes the
    weights; callers should surface the exclusions via attribution_report.
    """
    report = attribution_report(cm, strict=strict)
    return report.balanced_accuracy


def detection_report(cm: ConfusionMatrix, strict: bool = True) -> MetricsReport:
    recalls = per_class_recall(cm)
    excluded = tuple(i for i, r in enumerate(recalls) if r is None)
    ba = ba_detection(cm, strict=strict)
    return MetricsReport(
        task="detection",
        balanced_accuracy=ba,
        per_class_recall=tuple(recalls),
        sample_count=cm.total(),
        excluded_classes=excluded,
    )


def attribution_report(cm: ConfusionMatrix, strict: bool = True) -> MetricsReport:
    recalls = per_class_recall(cm)
    excluded = tuple(i for i, r in enumerate(recalls) if r is None)
    if excluded and strict:
        raise EmptyClassError(f"no samples for true class(es) {list(excluded)}")
    k_fake = cm.k - 1
    fake_recalls = [r for r in recalls[1:] if r is not None]
    real_weight = 0.0 if recalls[0] is None else 0.5
    fake_weight = 0.5 if fake_recalls else 0.0
    total_weight = real_weight + fake_weight
    if total_weight == 0.0:
        raise EmptyClassError("empty confusion matrix")
    ba = 0.0
    if recalls[0] is not None:
        ba += real_weight * recalls[0]
    if fake_recalls:
        divisor = k_fake if not excluded else len(fake_recalls)
        ba += fake_weight * (sum(fake_recalls) / divisor)
    ba /= total_weight
    return MetricsReport(
        task="attribution",
        balanced_accuracy=ba,
        per_class_recall=tuple(recalls),
        sample_count=cm.total(),
        excluded_classes=excluded,
    )
