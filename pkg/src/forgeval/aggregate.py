"""Fold per-face fake scores into per-identity and per-video verdicts.

Defaults: mean over the faces of one identity (robust to per-frame noise),
max over the identities of a video (one fake identity makes the video fake).
Both folds are pluggable policies, not hard-coded truths.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .ensembles import Decision
from .records import FaceRecord

DEFAULT_VIDEO_THRESHOLD = 0.5

_FOLDS = {
    "mean": lambda xs: math.fsum(xs) / len(xs),  # fsum: permutation-invariant mean
    "max": max,
    "median": statistics.median,
}


@dataclass(frozen=True)
class VideoVerdict:
    video_id: str
    per_identity_scores: Tuple[Tuple[str, float], ...]  # sorted by identity_id
    video_fake_score: float
    video_z_hat: int
    contributing_faces: int


def aggregate_identity(scores: Sequence[float], how: str = "mean") -> float:
    """Fold the fake scores of one identity's faces into a single score."""
    if not scores:
        raise ValueError("no face scores for identity")
    if any(not (0.0 <= s <= 1.0) for s in scores):
        raise ValueError("face score outside [0, 1]")
    return _FOLDS[how](list(scores))


def aggregate_video(
    video_id: str,
    identity_scores: Dict[str, float],
    contributing_faces: int,
    how: str = "max",
    threshold: float = DEFAULT_VIDEO_THRESHOLD,
) -> VideoVerdict:
    """Fold per-identity scores into one video verdict."""
    if not identity_scores:
        raise ValueError(f"video {video_id!r} has no identities")
    score = _FOLDS[how](list(identity_scores.values()))
    return VideoVerdict(
        video_id=video_id,
        per_identity_scores=tuple(sorted(identity_scores.items())),
        video_fake_score=score,
        video_z_hat=1 if score > threshold else 0,
        contributing_faces=contributing_faces,
    )


def build_verdicts(
    records: Iterable[FaceRecord],
    decisions: Dict[str, Decision],
    identity_fold: str = "mean",
    video_fold: str = "max",
    threshold: float = DEFAULT_VIDEO_THRESHOLD,
) -> List[VideoVerdict]:
    """One verdict per video, sorted by video_id regardless of input order."""
    faces: Dict[str, Dict[str, List[float]]] = {}
    counts: Dict[str, int] = {}
    for record in records:
        decision = decisions[record.sample_id]
        faces.setdefault(record.video_id, {}).setdefault(record.identity_id, []).append(
            decision.fake_score
        )
        counts[record.video_id] = counts.get(record.video_id, 0) + 1
    verdicts = []
    for video_id in sorted(faces):
        identity_scores = {
            identity: aggregate_identity(scores, identity_fold)
            for identity, scores in faces[video_id].items()
        }
        verdicts.append(
            aggregate_video(video_id, identity_scores, counts[video_id], video_fold, threshold)
        )
    return verdicts


def video_truth(records: Iterable[FaceRecord]) -> Dict[str, Optional[int]]:
    """Derive a video-level detection label: fake iff any face is labeled fake.

    Videos containing any unlabeled face get None (truth not derivable).
    """
    truth: Dict[str, Optional[int]] = {}
    complete: Dict[str, bool] = {}
    for record in records:
        vid = record.video_id
        if record.label_z is None:
            complete[vid] = False
            truth.setdefault(vid, 0)
            continue
        complete.setdefault(vid, True)
        truth[vid] = max(truth.get(vid, 0), record.label_z)
    return {vid: (truth[vid] if complete.get(vid, False) else None) for vid in truth}
