"""Wire manifests, score stores, combiners, and metrics into evaluations."""

from __future__ import annotations

from typing import Dict, List, Tuple

from . import metrics
from .aggregate import VideoVerdict, build_verdicts, video_truth
from .ensembles import (
    DESIGN_BINARY_SOFT,
    DESIGN_KIND,
    Decision,
    EnsembleConfig,
    ScoreTensor,
    combine,
)
from .formats import DatasetManifest, ScoreSet, assemble_tensor, check_coverage
from .metrics import ConfusionMatrix, MetricsReport, accumulate

TASK_DETECTION = "detection"
TASK_ATTRIBUTION = "attribution"
LEVEL_FACE = "face"
LEVEL_VIDEO = "video"


class DataMismatchError(ValueError):
    """Inputs are individually valid but do not fit together for the request."""


def assemble_all(manifest: DatasetManifest, scores: ScoreSet) -> List[ScoreTensor]:
    """Tensors for every manifest record, in manifest order; missing rows are fatal."""
    missing = check_coverage(manifest, scores)
    if missing:
        raise DataMismatchError(missing[0] + (f" (+{len(missing) - 1} more)" if len(missing) > 1 else ""))
    return [assemble_tensor(record.sample_id, scores) for record in manifest.records]


def make_config(design: str, k: int, threshold: float, scores: ScoreSet) -> EnsembleConfig:
    expected_kind = DESIGN_KIND[design]
    if scores.kind != expected_kind:
        raise DataMismatchError(
            f"design {design!r} needs {expected_kind!r} scores, roster declares {scores.kind!r}"
        )
    return EnsembleConfig(design=design, k=k, threshold=threshold)


def decide_all(tensors: List[ScoreTensor], config: EnsembleConfig) -> Dict[str, Decision]:
    return {tensor.sample_id: combine(tensor, config) for tensor in tensors}


def face_confusion(
    manifest: DatasetManifest, decisions: Dict[str, Decision], task: str
) -> ConfusionMatrix:
    if task == TASK_DETECTION:
        cm = ConfusionMatrix(2)
        for record in manifest.records:
            if record.label_z is None:
                raise DataMismatchError(f"sample {record.sample_id!r} has no detection label")
            accumulate(cm, record.label_z, decisions[record.sample_id].z_hat)
        return cm
    if task == TASK_ATTRIBUTION:
        cm = ConfusionMatrix(manifest.taxonomy.k + 1)
        for record in manifest.records:
            if record.label_y is None:
                raise DataMismatchError(
                    f"attribution task needs attribution labels; sample "
                    f"{record.sample_id!r} has none (detection-only manifest?)"
                )
            accumulate(cm, record.label_y, decisions[record.sample_id].y_hat)
        return cm
    raise ValueError(f"unknown task {task!r}")


def video_confusion(
    manifest: DatasetManifest, verdicts: List[VideoVerdict]
) -> ConfusionMatrix:
    truth = video_truth(manifest.records)
    cm = ConfusionMatrix(2)
    for verdict in verdicts:
        label = truth.get(verdict.video_id)
        if label is None:
            raise DataMismatchError(
                f"video {verdict.video_id!r} has unlabeled faces; video truth not derivable"
            )
        accumulate(cm, label, verdict.video_z_hat)
    return cm


def evaluate_faces(
    manifest: DatasetManifest,
    tensors: List[ScoreTensor],
    config: EnsembleConfig,
    task: str,
    strict: bool = True,
) -> Tuple[MetricsReport, ConfusionMatrix]:
    if task == TASK_ATTRIBUTION and config.design == DESIGN_BINARY_SOFT:
        raise DataMismatchError("binary-soft voting cannot attribute manipulations")
    decisions = decide_all(tensors, config)
    cm = face_confusion(manifest, decisions, task)
    if task == TASK_DETECTION:
        report = metrics.detection_report(cm, strict=strict)
    else:
        report = metrics.attribution_report(cm, strict=strict)
    return report, cm


def evaluate_videos(
    manifest: DatasetManifest,
    tensors: List[ScoreTensor],
    config: EnsembleConfig,
    strict: bool = True,
    identity_fold: str = "mean",
    video_fold: str = "max",
    video_threshold: float = 0.5,
) -> Tuple[MetricsReport, ConfusionMatrix, List[VideoVerdict]]:
    decisions = decide_all(tensors, config)
    verdicts = build_verdicts(
        manifest.records, decisions, identity_fold, video_fold, video_threshold
    )
    cm = video_confusion(manifest, verdicts)
    return metrics.detection_report(cm, strict=strict), cm, verdicts


def report_document(
    report: MetricsReport,
    cm: ConfusionMatrix,
    manifest: DatasetManifest,
    design: str,
    threshold: float,
    level: str,
) -> dict:
    """Build the serializable report; explicit level tag, no timestamps."""
    if report.task == TASK_ATTRIBUTION:
        labels = list(manifest.taxonomy.class_names)
    else:
        labels = ["real", "fake"]
    return {
        "task": report.task,
        "level": level,
        "design": design,
        "threshold": threshold,
        "dataset": manifest.dataset_name,
        "taxonomy": manifest.taxonomy.name,
        "class_labels": labels,
        "sample_count": report.sample_count,
        "balanced_accuracy": report.balanced_accuracy,
        "per_class_recall": list(report.per_class_recall),
        "excluded_classes": list(report.excluded_classes),
        "confusion_matrix": [row[:] for row in cm.counts],
    }
