"""The four ensemble combiners: pure functions from a score tensor to a decision.

All combiners assume rows already passed ingestion validation (probability
vectors, normalized). Argmax ties break toward the lowest class index, and the
max-pooling rule classifies a score exactly equal to the threshold as real.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field
from typing import Sequence, Tuple

from .records import UNATTRIBUTED_FAKE, g

BINARY = "binary"
MULTICLASS = "multiclass"
PER_MANIPULATION = "per-manipulation"

KINDS = (BINARY, MULTICLASS, PER_MANIPULATION)

DESIGN_BINARY_SOFT = "binary-soft"
DESIGN_MULTICLASS_SOFT = "multiclass-soft"
DESIGN_ONE_VS_REAL = "one-vs-real"
DESIGN_ONE_VS_REST = "one-vs-rest"

DESIGNS = (
    DESIGN_BINARY_SOFT,
    DESIGN_MULTICLASS_SOFT,
    DESIGN_ONE_VS_REAL,
    DESIGN_ONE_VS_REST,
)

# Which tensor kind each design consumes.
DESIGN_KIND = {
    DESIGN_BINARY_SOFT: BINARY,
    DESIGN_MULTICLASS_SOFT: MULTICLASS,
    DESIGN_ONE_VS_REAL: PER_MANIPULATION,
    DESIGN_ONE_VS_REST: PER_MANIPULATION,
}

ROW_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ScoreTensor:
    """N model outputs for one face, each a probability vector."""

    sample_id: str
    model_ids: Tuple[str, ...]
    rows: Tuple[Tuple[float, ...], ...]
    kind: str


def tensor_violations(tensor: ScoreTensor) -> list:
    """All broken tensor invariants (used at ingestion, not by combiners)."""
    problems = []
    if tensor.kind not in KINDS:
        problems.append(f"unknown tensor kind {tensor.kind!r}")
    if not tensor.rows:
        problems.append("empty tensor")
        return problems
    if len(tensor.model_ids) != len(tensor.rows):
        problems.append("model_ids/rows length mismatch")
    widths = {len(row) for row in tensor.rows}
    if len(widths) != 1:
        problems.append(f"ragged rows, widths {sorted(widths)}")
    elif tensor.kind in (BINARY, PER_MANIPULATION) and widths != {2}:
        problems.append(f"kind {tensor.kind} requires width 2, got {widths.pop()}")
    for i, row in enumerate(tensor.rows):
        if any(not (0.0 <= s <= 1.0) for s in row):
            problems.append(f"row {i} has entries outside [0, 1]")
        if abs(sum(row) - 1.0) > ROW_SUM_TOLERANCE:
            problems.append(f"row {i} sums to {sum(row)!r}, outside 1 +/- {ROW_SUM_TOLERANCE}")
    return problems


@dataclass(frozen=True)
class EnsembleConfig:
    design: str
    k: int
    threshold: float = 0.5

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ValueError(f"unknown design {self.design!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError(f"threshold {self.threshold} outside [0, 1]")


@dataclass(frozen=True)
class Decision:
    """Predicted labels for one face plus the continuous fake score kept for aggregation."""

    sample_id: str
    y_hat: int  # class index, or UNATTRIBUTED_FAKE for binary soft voting
    z_hat: int
    fake_score: float
    class_scores: Tuple[float, ...] = field(default_factory=tuple)


def _mean_rows(rows: Sequence[Sequence[float]]) -> Tuple[float, ...]:
    n = len(rows)
    if n == 1:
        return tuple(rows[0])

    def mean(col):
        # Identical entries average to themselves exactly; float summation
        # would not guarantee that (idempotence invariant).
        first = col[0]
        if all(v == first for v in col):
            return first
        # fsum rounds the exact sum once, so the mean is permutation invariant.
        return math.fsum(col) / n

    return tuple(mean(col) for col in zip(*rows))


def _argmax(values: Sequence[float]) -> int:
    # index() returns the first occurrence, so ties break to the lowest class.
    return values.index(max(values))


def combine_binary_soft(tensor: ScoreTensor) -> Decision:
    """Average binary detector outputs and take the argmax.

    Binary voting cannot attribute the manipulation, so a fake verdict carries
    the reserved unattributed-fake marker instead of a class index.
    """
    if tensor.kind != BINARY:
        raise ValueError(f"binary-soft needs a binary tensor, got {tensor.kind!r}")
    if not tensor.rows:
        raise ValueError("empty tensor")
    if any(len(row) != 2 for row in tensor.rows):
        raise ValueError("binary tensor rows must have width 2")
    avg = _mean_rows(tensor.rows)
    z_hat = _argmax(avg)
    y_hat = 0 if z_hat == 0 else UNATTRIBUTED_FAKE
    return Decision(tensor.sample_id, y_hat, z_hat, fake_score=avg[1], class_scores=avg)


def combine_multiclass_soft(tensor: ScoreTensor, k: int | None = None) -> Decision:
    """Average attribution outputs, argmax for the class, then map to a detection verdict."""
    if tensor.kind != MULTICLASS:
        raise ValueError(f"multiclass-soft needs a multiclass tensor, got {tensor.kind!r}")
    if not tensor.rows:
        raise ValueError("empty tensor")
    if k is not None and len(tensor.rows[0]) != k + 1:
        raise ValueError(
            f"tensor width {len(tensor.rows[0])} does not match k={k} (expected {k + 1})"
        )
    avg = _mean_rows(tensor.rows)
    y_hat = _argmax(avg)
    fake_score = sum(avg[1:])
    # Float summation can nudge the total fake mass a hair past 1.
    fake_score = min(max(fake_score, 0.0), 1.0)
    return Decision(tensor.sample_id, y_hat, g(y_hat), fake_score=fake_score, class_scores=avg)


def combine_one_vs_real(tensor: ScoreTensor, config: EnsembleConfig) -> Decision:
    """Max-pool per-manipulation fake scores against the threshold.

    A face is attributed to the strongest specialist only when its score
    strictly exceeds the threshold; a score equal to the threshold counts as
    real (conservative toward false accusations).
    """
    if tensor.kind != PER_MANIPULATION:
        raise ValueError(f"max-pooling needs a per-manipulation tensor, got {tensor.kind!r}")
    if not tensor.rows:
        raise ValueError("empty tensor")
    if len(tensor.rows) != config.k:
        raise ValueError(f"expected {config.k} specialist rows, got {len(tensor.rows)}")
    scores = tuple(row[1] for row in tensor.rows)
    best = _argmax(scores)
    if scores[best] > config.threshold:
        y_hat = best + 1
    else:
        y_hat = 0
    return Decision(tensor.sample_id, y_hat, g(y_hat), fake_score=scores[best], class_scores=scores)


def combine_one_vs_rest(tensor: ScoreTensor, config: EnsembleConfig) -> Decision:
    """Same decision rule as one-vs-real; the specialists were just trained differently."""
    return combine_one_vs_real(tensor, config)


def combine(tensor: ScoreTensor, config: EnsembleConfig) -> Decision:
    """Dispatch to the combiner selected by the config's design."""
    if config.design == DESIGN_BINARY_SOFT:
        return combine_binary_soft(tensor)
    if config.design == DESIGN_MULTICLASS_SOFT:
        return combine_multiclass_soft(tensor, config.k)
    if config.design == DESIGN_ONE_VS_REAL:
        return combine_one_vs_real(tensor, config)
    return combine_one_vs_rest(tensor, config)
