"""Command-line entry point for the score exporter.

Exit codes: 0 success, 2 usage/job error, 3 checkpoint or input failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .export import export
from .job import (
    CheckpointSpec,
    DETECTORS,
    DETECTOR_NONE,
    ExportJob,
    JobError,
    job_from_file,
)
from .models import CheckpointError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def parse_model_flag(text: str) -> CheckpointSpec:
    """Parse one --model flag: semicolon-separated key=value pairs, e.g.
    ``id=m0;kind=binary;source=stub:2.0,0.0;order=real-first``."""
    fields = {}
    for part in text.split(";"):
        if "=" not in part:
            raise JobError(f"--model part {part!r} is not key=value")
        key, value = part.split("=", 1)
        fields[key] = value
    unknown = set(fields) - {"id", "kind", "source", "order", "target"}
    if unknown:
        raise JobError(f"--model has unknown keys {sorted(unknown)}")
    for required in ("id", "kind", "source"):
        if required not in fields:
            raise JobError(f"--model is missing {required}=")
    return CheckpointSpec(
        model_id=fields["id"],
        kind=fields["kind"],
        source=fields["source"],
        output_order=fields.get("order"),
        target_class=fields.get("target"),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forgeexport",
        description="Run face-forgery classifier checkpoints over media and "
        "emit engine-compatible manifest and score files.",
    )
    parser.add_argument("--job", help="JSON job file (overrides the flags below)")
    parser.add_argument("--inputs", help="root directory with one subdirectory per class")
    parser.add_argument("--dataset", help="dataset name")
    parser.add_argument("--taxonomy", help="taxonomy name")
    parser.add_argument("--classes", help="comma-separated class names, real first")
    parser.add_argument("--model", action="append", default=[],
                        help="checkpoint declaration, repeatable: "
                        "id=...;kind=...;source=...[;order=...][;target=...]")
    parser.add_argument("--out-manifest", help="manifest output path")
    parser.add_argument("--out-scores", help="score output path")
    parser.add_argument("--frame-rate", type=float, default=1.0,
                        help="video sampling rate in frames per second")
    parser.add_argument("--crop-size", type=int, default=224)
    parser.add_argument("--detector", default=DETECTOR_NONE, choices=DETECTORS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--verbose", action="store_true")
    return parser


def job_from_args(args) -> ExportJob:
    if args.job:
        return job_from_file(args.job)
    missing = [flag for flag, value in (
        ("--inputs", args.inputs),
        ("--dataset", args.dataset),
        ("--taxonomy", args.taxonomy),
        ("--classes", args.classes),
        ("--out-manifest", args.out_manifest),
        ("--out-scores", args.out_scores),
    ) if not value]
    if missing or not args.model:
        missing += [] if args.model else ["--model"]
        raise JobError(f"without --job, these flags are required: {', '.join(missing)}")
    job = ExportJob(
        input_root=args.inputs,
        dataset_name=args.dataset,
        taxonomy_name=args.taxonomy,
        class_names=tuple(args.classes.split(",")),
        checkpoints=tuple(parse_model_flag(m) for m in args.model),
        manifest_out=args.out_manifest,
        scores_out=args.out_scores,
        frame_rate=args.frame_rate,
        crop_size=args.crop_size,
        detector=args.detector,
        seed=args.seed,
    )
    job.validate()
    return job


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        job = job_from_args(args)
    except (JobError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        manifest_path, scores_path = export(job)
    except (CheckpointError, JobError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {manifest_path} and {scores_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
