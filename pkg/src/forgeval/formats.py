"""Line-delimited wire formats: manifests, score files, and report documents.

All formats are versioned, streamable, and byte-reproducible: writers emit a
canonical form (sorted records, fixed field order, scores at 9 significant
digits), so parse-then-serialize is the identity on canonical files and a
single-pass canonicalization on everything else.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, IO, Iterable, List, Optional, Tuple, Union

from .ensembles import (
    BINARY,
    KINDS,
    PER_MANIPULATION,
    ROW_SUM_TOLERANCE,
    ScoreTensor,
)
from .records import FaceRecord, Taxonomy, g, is_valid_identifier

MANIFEST_MAGIC = "#forgeval-manifest v1"
SCORES_MAGIC = "#forgeval-scores v1"
REPORT_VERSION = "forgeval-report v1"
VERDICTS_MAGIC = "#forgeval-verdicts v1"
SWEEP_CSV_MAGIC = "#forgeval-sweep v1"

LABEL_MODE_FULL = "full"
LABEL_MODE_DETECTION_ONLY = "detection-only"

KIND_WIDTH = {BINARY: 2, PER_MANIPULATION: 2}


class FormatError(ValueError):
    """A wire-format violation, located by path and line number."""

    def __init__(self, message: str, path: str = "<string>", line: Optional[int] = None):
        self.path = path
        self.line = line
        where = path if line is None else f"{path}:{line}"
        super().__init__(f"{where}: {message}")


def format_score(value: float) -> str:
    return format(value, ".9g")


@dataclass
class DatasetManifest:
    dataset_name: str
    taxonomy: Taxonomy
    records: List[FaceRecord]
    label_mode: str = LABEL_MODE_FULL


@dataclass
class ScoreSet:
    """Immutable random-access score store keyed by (sample_id, model_id)."""

    taxonomy_name: str
    roster: Tuple[Tuple[str, str], ...]  # (model_id, kind), canonical row order
    rows: Dict[Tuple[str, str], Tuple[float, ...]]

    @property
    def kind(self) -> str:
        return self.roster[0][1]

    @property
    def model_ids(self) -> Tuple[str, ...]:
        return tuple(mid for mid, _ in self.roster)

    def sample_ids(self) -> List[str]:
        return sorted({sid for sid, _ in self.rows})


def _parse_header(lines: List[str], magic: str, keys: List[str], path: str) -> Dict[str, str]:
    if not lines or lines[0].rstrip("\n") != magic:
        raise FormatError(f"missing or wrong format header, expected {magic!r}", path, 1)
    header: Dict[str, str] = {}
    for key in keys:
        prefix = f"#{key}="
        line_no = len(header) + 2
        if line_no > len(lines) or not lines[line_no - 1].rstrip("\n").startswith(prefix):
            raise FormatError(f"expected header line {prefix}...", path, line_no)
        header[key] = lines[line_no - 1].rstrip("\n")[len(prefix):]
    return header


# ---------------------------------------------------------------------------
# Manifests


def read_manifest(source: Union[str, IO[str]], path: str = "<string>") -> DatasetManifest:
    """Parse and fully validate a manifest; errors name the offending line."""
    if isinstance(source, str):
        path = source
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = source.readlines()
    header = _parse_header(lines, MANIFEST_MAGIC, ["dataset", "taxonomy", "classes", "label_mode"], path)
    try:
        taxonomy = Taxonomy(header["taxonomy"], tuple(header["classes"].split(",")))
    except ValueError as exc:
        raise FormatError(str(exc), path, 4) from None
    if not is_valid_identifier(header["dataset"]):
        raise FormatError(f"invalid dataset name {header['dataset']!r}", path, 2)
    label_mode = header["label_mode"]
    if label_mode not in (LABEL_MODE_FULL, LABEL_MODE_DETECTION_ONLY):
        raise FormatError(f"unknown label_mode {label_mode!r}", path, 5)

    records: List[FaceRecord] = []
    seen = set()
    for line_no, raw in enumerate(lines[5:], start=6):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 6:
            raise FormatError(f"expected 6 fields, got {len(fields)}", path, line_no)
        sample_id, video_id, frame_str, identity_id, y_str, z_str = fields
        if sample_id in seen:
            raise FormatError(f"duplicate sample_id {sample_id!r}", path, line_no)
        seen.add(sample_id)
        try:
            frame_index = int(frame_str)
        except ValueError:
            raise FormatError(f"frame_index {frame_str!r} is not an integer", path, line_no) from None
        label_y: Optional[int] = None
        if y_str:
            try:
                label_y = taxonomy.class_index(y_str)
            except KeyError as exc:
                raise FormatError(str(exc.args[0]), path, line_no) from None
        label_z: Optional[int] = None
        if z_str:
            if z_str not in ("0", "1"):
                raise FormatError(f"detection label {z_str!r} must be 0 or 1", path, line_no)
            label_z = int(z_str)
        if label_mode == LABEL_MODE_FULL and (label_y is None or label_z is None):
            raise FormatError("full label_mode requires both labels", path, line_no)
        if label_mode == LABEL_MODE_DETECTION_ONLY and (label_y is not None or label_z is None):
            raise FormatError(
                "detection-only label_mode requires a detection label and no attribution label",
                path,
                line_no,
            )
        if label_y is not None and label_z is not None and label_z != g(label_y):
            raise FormatError(
                f"detection label {label_z} inconsistent with attribution label "
                f"{y_str!r} (expected {g(label_y)})",
                path,
                line_no,
            )
        record = FaceRecord(sample_id, video_id, frame_index, identity_id, label_y, label_z)
        for field_name in ("sample_id", "video_id", "identity_id"):
            if not is_valid_identifier(getattr(record, field_name)):
                raise FormatError(f"invalid {field_name} {getattr(record, field_name)!r}", path, line_no)
        if frame_index < 0:
            raise FormatError(f"negative frame_index {frame_index}", path, line_no)
        records.append(record)
    return DatasetManifest(header["dataset"], taxonomy, records, label_mode)


def manifest_to_text(manifest: DatasetManifest) -> str:
    out = [
        MANIFEST_MAGIC,
        f"#dataset={manifest.dataset_name}",
        f"#taxonomy={manifest.taxonomy.name}",
        f"#classes={','.join(manifest.taxonomy.class_names)}",
        f"#label_mode={manifest.label_mode}",
    ]
    for r in sorted(manifest.records, key=lambda r: r.sample_id):
        y = "" if r.label_y is None else manifest.taxonomy.class_names[r.label_y]
        z = "" if r.label_z is None else str(r.label_z)
        out.append(f"{r.sample_id},{r.video_id},{r.frame_index},{r.identity_id},{y},{z}")
    return "\n".join(out) + "\n"


def write_manifest(manifest: DatasetManifest, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(manifest_to_text(manifest))


# ---------------------------------------------------------------------------
# Score files


def read_scores(source: Union[str, IO[str]], manifest: DatasetManifest, path: str = "<string>") -> ScoreSet:
    """Parse a score file against a manifest's taxonomy.

    Row values are kept exactly as parsed (so serialization round-trips);
    renormalization to unit sum happens when tensors are assembled.
    """
    if isinstance(source, str):
        path = source
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = source.readlines()
    header = _parse_header(lines, SCORES_MAGIC, ["taxonomy"], path)
    if header["taxonomy"] != manifest.taxonomy.name:
        raise FormatError(
            f"score taxonomy {header['taxonomy']!r} does not match manifest "
            f"taxonomy {manifest.taxonomy.name!r}",
            path,
            2,
        )
    k = manifest.taxonomy.k

    roster: List[Tuple[str, str]] = []
    body_start = 2
    for line_no, raw in enumerate(lines[2:], start=3):
        line = raw.rstrip("\n")
        if not line.startswith("#model="):
            body_start = line_no - 1
            break
        body_start = line_no
        spec = line[len("#model="):]
        parts = spec.split(":")
        if len(parts) != 2:
            raise FormatError(f"model declaration {spec!r} must be id:kind", path, line_no)
        model_id, kind = parts
        if not is_valid_identifier(model_id):
            raise FormatError(f"invalid model id {model_id!r}", path, line_no)
        if kind not in KINDS:
            raise FormatError(f"unknown model kind {kind!r}", path, line_no)
        if any(mid == model_id for mid, _ in roster):
            raise FormatError(f"duplicate model id {model_id!r}", path, line_no)
        roster.append((model_id, kind))
    if not roster:
        raise FormatError("score file declares no models", path, 3)
    kinds = {kind for _, kind in roster}
    if len(kinds) != 1:
        raise FormatError(f"mixed model kinds in one roster: {sorted(kinds)}", path, 3)
    kind = kinds.pop()
    if kind == PER_MANIPULATION and len(roster) != k:
        raise FormatError(
            f"per-manipulation roster needs {k} models (one per manipulation), got {len(roster)}",
            path,
            3,
        )
    width = KIND_WIDTH.get(kind, k + 1)

    model_ids = {mid for mid, _ in roster}
    known_samples = {r.sample_id for r in manifest.records}
    rows: Dict[Tuple[str, str], Tuple[float, ...]] = {}
    for line_no, raw in enumerate(lines[body_start:], start=body_start + 1):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 2 + width:
            raise FormatError(
                f"expected sample_id,model_id plus {width} scores, got {len(fields)} fields",
                path,
                line_no,
            )
        sample_id, model_id = fields[0], fields[1]
        if model_id not in model_ids:
            raise FormatError(f"undeclared model id {model_id!r}", path, line_no)
        if sample_id not in known_samples:
            raise FormatError(f"sample {sample_id!r} not in manifest", path, line_no)
        key = (sample_id, model_id)
        if key in rows:
            raise FormatError(f"duplicate score row for ({sample_id}, {model_id})", path, line_no)
        try:
            values = tuple(float(f) for f in fields[2:])
        except ValueError:
            raise FormatError("non-numeric score entry", path, line_no) from None
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise FormatError(f"score entry outside [0, 1]: {fields[2:]}", path, line_no)
        total = sum(values)
        if abs(total - 1.0) > ROW_SUM_TOLERANCE:
            raise FormatError(
                f"row sums to {total!r}, outside 1 +/- {ROW_SUM_TOLERANCE}", path, line_no
            )
        rows[key] = values
    return ScoreSet(header["taxonomy"], tuple(roster), rows)


def scores_to_text(scores: ScoreSet) -> str:
    out = [SCORES_MAGIC, f"#taxonomy={scores.taxonomy_name}"]
    for model_id, kind in scores.roster:
        out.append(f"#model={model_id}:{kind}")
    order = {mid: i for i, (mid, _) in enumerate(scores.roster)}
    for (sample_id, model_id) in sorted(scores.rows, key=lambda k: (k[0], order[k[1]])):
        values = ",".join(format_score(v) for v in scores.rows[(sample_id, model_id)])
        out.append(f"{sample_id},{model_id},{values}")
    return "\n".join(out) + "\n"


def write_scores(scores: ScoreSet, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(scores_to_text(scores))


def check_coverage(manifest: DatasetManifest, scores: ScoreSet) -> List[str]:
    """Every manifest sample must carry a row from every roster model."""
    missing = []
    for record in manifest.records:
        for model_id, _ in scores.roster:
            if (record.sample_id, model_id) not in scores.rows:
                missing.append(f"missing score for sample {record.sample_id!r}, model {model_id!r}")
    return missing


def assemble_tensor(sample_id: str, scores: ScoreSet) -> ScoreTensor:
    """Build the N x width tensor for one sample, rows in roster order.

    Missing rows are a hard error, never imputed. Rows within the sum
    tolerance are renormalized to unit sum here (changing no entry by more
    than the tolerance), so combiners can assume normalization.
    """
    rows = []
    for model_id, _ in scores.roster:
        key = (sample_id, model_id)
        if key not in scores.rows:
            raise KeyError(f"missing score for sample {sample_id!r}, model {model_id!r}")
        values = scores.rows[key]
        total = sum(values)
        if total != 1.0:
            values = tuple(v / total for v in values)
        rows.append(values)
    return ScoreTensor(sample_id, scores.model_ids, tuple(rows), scores.kind)


def single_model_view(scores: ScoreSet, model_id: str) -> ScoreSet:
    """Restrict a score set to one model (for per-model baselines)."""
    roster = tuple((mid, kind) for mid, kind in scores.roster if mid == model_id)
    if not roster:
        raise KeyError(f"model {model_id!r} not in roster")
    rows = {key: v for key, v in scores.rows.items() if key[1] == model_id}
    return ScoreSet(scores.taxonomy_name, roster, rows)


# ---------------------------------------------------------------------------
# Reports and verdicts


def report_to_text(report: dict) -> str:
    """Serialize a report dict deterministically, version field first."""
    document = {"format_version": REPORT_VERSION}
    document.update(report)
    return json.dumps(document, indent=2) + "\n"


def write_report(report: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report_to_text(report))


def verdicts_to_text(verdicts: Iterable) -> str:
    out = [VERDICTS_MAGIC, "#fields=video_id,video_fake_score,video_z_hat,contributing_faces,identity_scores"]
    for v in verdicts:
        identities = ";".join(
            f"{identity}={format_score(score)}" for identity, score in v.per_identity_scores
        )
        out.append(
            f"{v.video_id},{format_score(v.video_fake_score)},{v.video_z_hat},"
            f"{v.contributing_faces},{identities}"
        )
    return "\n".join(out) + "\n"
