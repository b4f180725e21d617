"""The export pipeline: media in, manifest + score files out."""

from __future__ import annotations

import logging
from typing import Dict, Tuple

import numpy as np

from . import wire
from .inputs import collect_samples
from .job import ExportJob, KIND_MULTICLASS
from .models import batches, load_predictor, predict_probabilities

log = logging.getLogger(__name__)


def export(job: ExportJob) -> Tuple[str, str]:
    """Run the full job and return the (manifest, scores) output paths.

    Output is canonical and deterministic: samples are discovered in sorted
    order, the roster follows the job's canonical checkpoint order, and both
    files are written sorted.
    """
    job.validate()
    samples = collect_samples(job)
    batch = np.stack([s.pixels for s in samples])

    checkpoints = job.ordered_checkpoints()
    width = len(job.class_names) if job.kind == KIND_MULTICLASS else 2
    rows: Dict[Tuple[str, str], Tuple[float, ...]] = {}
    for spec in checkpoints:
        predictor = load_predictor(spec)
        parts = [
            predict_probabilities(spec, predictor, batch[window], width)
            for window in batches(len(samples), job.batch_size)
        ]
        probs = np.concatenate(parts, axis=0)
        for sample, row in zip(samples, probs):
            rows[(sample.sample_id, spec.model_id)] = tuple(float(v) for v in row)
        log.info("checkpoint %s: scored %d samples", spec.model_id, len(samples))

    records = [
        (s.sample_id, s.video_id, s.frame_index, s.identity_id, s.class_name)
        for s in samples
    ]
    wire.write_text(
        job.manifest_out,
        wire.manifest_text(job.dataset_name, job.taxonomy_name, job.class_names, records),
    )
    roster = [(spec.model_id, spec.kind) for spec in checkpoints]
    wire.write_text(job.scores_out, wire.scores_text(job.taxonomy_name, roster, rows))
    log.info(
        "wrote %s (%d records) and %s (%d rows)",
        job.manifest_out, len(records), job.scores_out, len(rows),
    )
    return job.manifest_out, job.scores_out
