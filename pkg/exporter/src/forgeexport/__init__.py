"""forgeexport: run face-forgery classifier checkpoints over images and
videos and emit manifest + score files in the evaluation engine's wire
format."""

from .export import export
from .job import CheckpointSpec, ExportJob, JobError, job_from_file
from .models import CheckpointError, load_predictor, softmax

__all__ = [
    "CheckpointError",
    "CheckpointSpec",
    "ExportJob",
    "JobError",
    "export",
    "job_from_file",
    "load_predictor",
    "softmax",
]

__version__ = "0.1.0"
