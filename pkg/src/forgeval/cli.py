"""Command-line entry point: validate, evaluate, sweep, aggregate, simulate.

All commands are deterministic given their inputs and flags; outputs carry a
format-version header but no timestamps or machine identifiers. Exit codes:
0 success, 2 usage error, 3 validation/format failure, 4 data mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

from . import formats, synth
from .sweep import default_grid, make_grid, sweep, sweep_to_csv
from .ensembles import DESIGNS
from .evaluate import (
    DataMismatchError,
    LEVEL_FACE,
    LEVEL_VIDEO,
    TASK_ATTRIBUTION,
    TASK_DETECTION,
    assemble_all,
    evaluate_faces,
    evaluate_videos,
    make_config,
    report_document,
)
from .formats import FormatError
from .metrics import EmptyClassError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_MISMATCH = 4


def _add_io_args(parser: argparse.ArgumentParser, scores_required: bool = True) -> None:
    parser.add_argument("--manifest", required=True, help="dataset manifest file")
    parser.add_argument("--scores", required=scores_required, help="score file")


def _add_eval_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--design", required=True, choices=DESIGNS)
    parser.add_argument("--threshold", type=float, default=0.5, help="max-pooling threshold t")
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="error on empty ground-truth classes (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false",
                      help="drop empty classes from the average and record them")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallelism degree; outputs are identical for any value")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forgeval",
        description="Score-level ensemble decisions and balanced-accuracy "
        "evaluation for face-forgery classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a manifest and optionally a score file")
    _add_io_args(p, scores_required=False)

    p = sub.add_parser("evaluate", help="evaluate one ensemble design on a scored manifest")
    _add_io_args(p)
    _add_eval_args(p)
    p.add_argument("--task", required=True, choices=[TASK_DETECTION, TASK_ATTRIBUTION])
    p.add_argument("--level", default=LEVEL_FACE, choices=[LEVEL_FACE, LEVEL_VIDEO])
    p.add_argument("--identity-fold", default="mean", choices=["mean", "max", "median"])
    p.add_argument("--video-fold", default="max", choices=["mean", "max", "median"])
    p.add_argument("--video-threshold", type=float, default=0.5)
    p.add_argument("--out", required=True, help="report file (JSON)")

    p = sub.add_parser("sweep", help="balanced accuracy across a threshold grid")
    _add_io_args(p)
    _add_eval_args(p)
    p.add_argument("--task", default="both",
                   choices=[TASK_DETECTION, TASK_ATTRIBUTION, "both"])
    p.add_argument("--grid", default=None,
                   help="lo:hi:step (inclusive); default 0.05:0.95:0.05")
    p.add_argument("--out", required=True, help="CSV output file")

    p = sub.add_parser("aggregate", help="fold face decisions into per-video verdicts")
    _add_io_args(p)
    _add_eval_args(p)
    p.add_argument("--identity-fold", default="mean", choices=["mean", "max", "median"])
    p.add_argument("--video-fold", default="max", choices=["mean", "max", "median"])
    p.add_argument("--video-threshold", type=float, default=0.5)
    p.add_argument("--out", required=True, help="verdict file")
    p.add_argument("--report", default=None,
                   help="also write a video-level detection report here")

    p = sub.add_parser("simulate", help="generate a synthetic manifest + score file")
    p.add_argument("--preset", required=True, choices=sorted(synth.PRESETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)

    return parser


def _load(args):
    manifest = formats.read_manifest(args.manifest)
    scores = formats.read_scores(args.scores, manifest)
    return manifest, scores


def cmd_validate(args) -> int:
    try:
        manifest = formats.read_manifest(args.manifest)
    except FormatError as exc:
        print(f"INVALID manifest: {exc}")
        return EXIT_VALIDATION
    print(f"manifest ok: {len(manifest.records)} records, "
          f"taxonomy {manifest.taxonomy.name} (k={manifest.taxonomy.k})")
    if args.scores is None:
        return EXIT_OK
    try:
        scores = formats.read_scores(args.scores, manifest)
    except FormatError as exc:
        print(f"INVALID scores: {exc}")
        return EXIT_VALIDATION
    missing = formats.check_coverage(manifest, scores)
    if missing:
        for line in missing[:20]:
            print(f"INVALID coverage: {line}")
        if len(missing) > 20:
            print(f"... {len(missing) - 20} more")
        return EXIT_VALIDATION
    print(f"scores ok: {len(scores.roster)} models ({scores.kind}), "
          f"{len(scores.rows)} rows, full coverage")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    manifest, scores = _load(args)
    config = make_config(args.design, manifest.taxonomy.k, args.threshold, scores)
    tensors = assemble_all(manifest, scores)
    if args.level == LEVEL_VIDEO:
        if args.task != TASK_DETECTION:
            raise DataMismatchError("video-level evaluation supports only the detection task")
        report, cm, _ = evaluate_videos(
            manifest, tensors, config, strict=args.strict,
            identity_fold=args.identity_fold, video_fold=args.video_fold,
            video_threshold=args.video_threshold,
        )
    else:
        report, cm = evaluate_faces(manifest, tensors, config, args.task, strict=args.strict)
    document = report_document(report, cm, manifest, args.design, args.threshold, args.level)
    formats.write_report(document, args.out)
    print(f"{args.task} BA ({args.level} level, {args.design}, t={args.threshold:g}): "
          f"{report.balanced_accuracy:.6f} on {report.sample_count} samples")
    return EXIT_OK


def _parse_grid(spec: Optional[str]) -> List[float]:
    if spec is None:
        return default_grid()
    parts = spec.split(":")
    if len(parts) != 3:
        raise FormatError("--grid must be lo:hi:step", "<args>")
    lo, hi, step = (float(p) for p in parts)
    return make_grid(lo, hi, step)


def cmd_sweep(args) -> int:
    manifest, scores = _load(args)
    make_config(args.design, manifest.taxonomy.k, 0.5, scores)  # kind check
    tensors = assemble_all(manifest, scores)
    grid = _parse_grid(args.grid)
    if args.task == "both":
        tasks = [TASK_DETECTION]
        if manifest.label_mode == formats.LABEL_MODE_FULL:
            tasks.append(TASK_ATTRIBUTION)
    else:
        tasks = [args.task]
    results = [
        sweep(manifest, tensors, args.design, grid, task,
              manifest.taxonomy.k, strict=args.strict)
        for task in tasks
    ]
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(sweep_to_csv(results))
    for result in results:
        print(f"{result.task}: best t={result.best[0]:.2f} BA={result.best[1]:.6f} "
              f"over {len(result.grid)} thresholds")
    return EXIT_OK


def cmd_aggregate(args) -> int:
    manifest, scores = _load(args)
    config = make_config(args.design, manifest.taxonomy.k, args.threshold, scores)
    tensors = assemble_all(manifest, scores)
    try:
        report, cm, verdicts = evaluate_videos(
            manifest, tensors, config, strict=args.strict,
            identity_fold=args.identity_fold, video_fold=args.video_fold,
            video_threshold=args.video_threshold,
        )
        have_labels = True
    except (DataMismatchError, EmptyClassError):
        from .aggregate import build_verdicts
        from .evaluate import decide_all
        verdicts = build_verdicts(
            manifest.records, decide_all(tensors, config),
            args.identity_fold, args.video_fold, args.video_threshold,
        )
        report = cm = None
        have_labels = False
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(formats.verdicts_to_text(verdicts))
    print(f"{len(verdicts)} video verdicts written")
    if have_labels:
        print(f"video-level detection BA: {report.balanced_accuracy:.6f}")
        if args.report:
            document = report_document(report, cm, manifest, args.design,
                                       args.threshold, LEVEL_VIDEO)
            formats.write_report(document, args.report)
    elif args.report:
        raise DataMismatchError("video labels not derivable; cannot write a video report")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = synth.preset(args.preset, seed=args.seed)
    manifest, scores = synth.generate(cfg)
    os.makedirs(args.out, exist_ok=True)
    manifest_path = os.path.join(args.out, "manifest.txt")
    scores_path = os.path.join(args.out, "scores.txt")
    formats.write_manifest(manifest, manifest_path)
    formats.write_scores(scores, scores_path)
    print(f"preset {args.preset} seed {args.seed}: {len(manifest.records)} samples, "
          f"k={cfg.k}, {len(cfg.models)} {cfg.kind} models")
    for spec, acc in zip(cfg.models, synth.measured_accuracy(cfg)):
        print(f"  {spec.model_id}: target {spec.accuracy:g}, measured argmax accuracy {acc:.4f}")
    print(f"wrote {manifest_path} and {scores_path}")
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "aggregate": cmd_aggregate,
    "simulate": cmd_simulate,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataMismatchError, EmptyClassError, KeyError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return EXIT_MISMATCH
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
