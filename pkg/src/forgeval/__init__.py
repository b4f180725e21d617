"""Score-level ensemble decisions and balanced-accuracy evaluation for
face-forgery classifiers."""

from .aggregate import VideoVerdict, aggregate_identity, aggregate_video, build_verdicts
from .ensembles import (
    DESIGNS,
    Decision,
    EnsembleConfig,
    ScoreTensor,
    combine,
    combine_binary_soft,
    combine_multiclass_soft,
    combine_one_vs_real,
    combine_one_vs_rest,
)
from .metrics import ConfusionMatrix, MetricsReport, accumulate, ba_attribution, ba_detection
from .records import FaceRecord, Taxonomy, UNATTRIBUTED_FAKE, g, validate_record
from .sweep import SweepResult, default_grid, make_grid, sweep

__all__ = [
    "ConfusionMatrix",
    "Decision",
    "DESIGNS",
    "EnsembleConfig",
    "FaceRecord",
    "MetricsReport",
    "ScoreTensor",
    "SweepResult",
    "Taxonomy",
    "UNATTRIBUTED_FAKE",
    "VideoVerdict",
    "accumulate",
    "aggregate_identity",
    "aggregate_video",
    "ba_attribution",
    "ba_detection",
    "build_verdicts",
    "combine",
    "combine_binary_soft",
    "combine_multiclass_soft",
    "combine_one_vs_real",
    "combine_one_vs_rest",
    "default_grid",
    "g",
    "make_grid",
    "sweep",
    "validate_record",
]

__version__ = "0.1.0"
