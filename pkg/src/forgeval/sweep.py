"""Threshold sweeps for the max-pooling ensembles.

Scores are threshold-independent, so tensors are assembled once and decisions
are recomputed per grid point; each point is exactly what a direct evaluation
at that threshold would produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .ensembles import DESIGN_ONE_VS_REAL, DESIGN_ONE_VS_REST, EnsembleConfig, ScoreTensor
from .evaluate import evaluate_faces
from .formats import DatasetManifest

SWEEPABLE_DESIGNS = (DESIGN_ONE_VS_REAL, DESIGN_ONE_VS_REST)

DEFAULT_GRID_POINTS = 19


def default_grid() -> List[float]:
    """The 19 thresholds 0.05, 0.10, ..., 0.95."""
    return [i / 20 for i in range(1, 20)]


def make_grid(lo: float, hi: float, step: float) -> List[float]:
    """Inclusive, strictly increasing grid; lo == hi yields a single point."""
    if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
        raise ValueError("grid bounds must lie in [0, 1]")
    if hi < lo:
        raise ValueError("grid upper bound below lower bound")
    if lo == hi:
        return [lo]
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(round((hi - lo) / step))
    grid = [round(lo + i * step, 12) for i in range(n + 1)]
    return [t for t in grid if t <= hi + 1e-12]


@dataclass(frozen=True)
class SweepResult:
    design: str
    task: str
    grid: Tuple[float, ...]
    ba_per_threshold: Tuple[float, ...]
    best: Tuple[float, float]  # (threshold, balanced accuracy), ties -> smallest t


def sweep(
    manifest: DatasetManifest,
    tensors: List[ScoreTensor],
    design: str,
    grid: List[float],
    task: str,
    k: int,
    strict: bool = True,
) -> SweepResult:
    if design not in SWEEPABLE_DESIGNS:
        raise ValueError(f"threshold sweep applies to {SWEEPABLE_DESIGNS}, not {design!r}")
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be non-empty and strictly increasing")
    bas = []
    for t in grid:
        config = EnsembleConfig(design=design, k=k, threshold=t)
        report, _ = evaluate_faces(manifest, tensors, config, task, strict=strict)
        bas.append(report.balanced_accuracy)
    best_index = max(range(len(grid)), key=lambda i: (bas[i], -grid[i]))
    return SweepResult(
        design=design,
        task=task,
        grid=tuple(grid),
        ba_per_threshold=tuple(bas),
        best=(grid[best_index], bas[best_index]),
    )


def sweep_to_csv(results: List[SweepResult]) -> str:
    """CSV with one BA column per task, rows aligned on the shared grid."""
    if not results:
        raise ValueError("no sweep results")
    grid = results[0].grid
    for r in results[1:]:
        if r.grid != grid or r.design != results[0].design:
            raise ValueError("sweep results must share one grid and design")
    header = "threshold," + ",".join(f"ba_{r.task}" for r in results)
    lines = [header]
    for i, t in enumerate(grid):
        values = ",".join(repr(r.ba_per_threshold[i]) for r in results)
        lines.append(f"{format(t, '.2f')},{values}")
    return "\n".join(lines) + "\n"
