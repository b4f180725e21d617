"""Export job description: inputs, taxonomy, and checkpoint declarations."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple

KIND_BINARY = "binary"
KIND_MULTICLASS = "multiclass"
KIND_PER_MANIPULATION = "per-manipulation"
KINDS = (KIND_BINARY, KIND_MULTICLASS, KIND_PER_MANIPULATION)

ORDER_REAL_FIRST = "real-first"
ORDER_FAKE_FIRST = "fake-first"
OUTPUT_ORDERS = (ORDER_REAL_FIRST, ORDER_FAKE_FIRST)

DETECTOR_NONE = "none"
DETECTOR_HAAR = "haar"
DETECTORS = (DETECTOR_NONE, DETECTOR_HAAR)

_IDENTIFIER = re.compile(r"[a-zA-Z0-9._:/-]+\Z")


def is_valid_identifier(value: str) -> bool:
    return bool(_IDENTIFIER.match(value))


class JobError(ValueError):
    """An invalid job description."""


@dataclass(frozen=True)
class CheckpointSpec:
    """One classifier checkpoint and how to interpret its output vector.

    Two-output checkpoints (binary and per-manipulation) must declare which
    output comes first; there is no safe default. Per-manipulation
    checkpoints additionally name the manipulation class they score.
    """

    model_id: str
    kind: str
    source: str
    output_order: Optional[str] = None
    target_class: Optional[str] = None

    def validate(self, class_names: Tuple[str, ...]) -> None:
        if not is_valid_identifier(self.model_id):
            raise JobError(f"invalid model id {self.model_id!r}")
        if self.kind not in KINDS:
            raise JobError(f"unknown checkpoint kind {self.kind!r}")
        if self.kind in (KIND_BINARY, KIND_PER_MANIPULATION):
            if self.output_order not in OUTPUT_ORDERS:
                raise JobError(
                    f"checkpoint {self.model_id!r}: two-output checkpoints must "
                    f"declare output_order as one of {OUTPUT_ORDERS}"
                )
        elif self.output_order is not None:
            raise JobError(
                f"checkpoint {self.model_id!r}: output_order only applies to "
                "two-output checkpoints"
            )
        if self.kind == KIND_PER_MANIPULATION:
            if self.target_class is None:
                raise JobError(
                    f"checkpoint {self.model_id!r}: per-manipulation checkpoints "
                    "must declare target_class"
                )
            if self.target_class not in class_names[1:]:
                raise JobError(
                    f"checkpoint {self.model_id!r}: target_class "
                    f"{self.target_class!r} is not a manipulation class"
                )
        elif self.target_class is not None:
            raise JobError(
                f"checkpoint {self.model_id!r}: target_class only applies to "
                "per-manipulation checkpoints"
            )

    @property
    def width(self) -> Optional[int]:
        """Expected output width, or None when it depends on the taxonomy."""
        if self.kind == KIND_MULTICLASS:
            return None
        return 2


@dataclass
class ExportJob:
    """Everything needed to turn raw media into manifest + score files.

    ``input_root`` holds one subdirectory per taxonomy class; each file
    inside is an image or a video whose faces carry that class label.
    """

    input_root: str
    dataset_name: str
    taxonomy_name: str
    class_names: Tuple[str, ...]
    checkpoints: Tuple[CheckpointSpec, ...]
    manifest_out: str
    scores_out: str
    frame_rate: float = 1.0
    crop_size: int = 224
    detector: str = DETECTOR_NONE
    seed: int = 0
    batch_size: int = field(default=32)

    def validate(self) -> None:
        for name in (self.dataset_name, self.taxonomy_name):
            if not is_valid_identifier(name):
                raise JobError(f"invalid identifier {name!r}")
        if len(self.class_names) < 2:
            raise JobError("taxonomy needs the real class plus at least one manipulation")
        if len(set(self.class_names)) != len(self.class_names):
            raise JobError("duplicate class names in taxonomy")
        for name in self.class_names:
            if not is_valid_identifier(name):
                raise JobError(f"invalid class name {name!r}")
        if not self.checkpoints:
            raise JobError("job declares no checkpoints")
        seen = set()
        for spec in self.checkpoints:
            spec.validate(self.class_names)
            if spec.model_id in seen:
                raise JobError(f"duplicate model id {spec.model_id!r}")
            seen.add(spec.model_id)
        kinds = {spec.kind for spec in self.checkpoints}
        if len(kinds) != 1:
            raise JobError(f"all checkpoints in one job must share a kind, got {sorted(kinds)}")
        if kinds == {KIND_PER_MANIPULATION}:
            targets = sorted(spec.target_class for spec in self.checkpoints)
            if targets != sorted(self.class_names[1:]):
                raise JobError(
                    "per-manipulation jobs need exactly one checkpoint per "
                    f"manipulation class; declared targets {targets}, "
                    f"taxonomy manipulations {sorted(self.class_names[1:])}"
                )
        if self.frame_rate <= 0:
            raise JobError(f"frame_rate must be positive, got {self.frame_rate}")
        if self.crop_size <= 0:
            raise JobError(f"crop_size must be positive, got {self.crop_size}")
        if self.detector not in DETECTORS:
            raise JobError(f"unknown detector {self.detector!r}")

    @property
    def kind(self) -> str:
        return self.checkpoints[0].kind

    def ordered_checkpoints(self) -> Tuple[CheckpointSpec, ...]:
        """Checkpoints in canonical roster order.

        Per-manipulation rosters follow taxonomy order so the i-th model
        scores the i-th manipulation; other kinds sort by model id.
        """
        if self.kind == KIND_PER_MANIPULATION:
            rank = {name: i for i, name in enumerate(self.class_names)}
            return tuple(sorted(self.checkpoints, key=lambda s: rank[s.target_class]))
        return tuple(sorted(self.checkpoints, key=lambda s: s.model_id))


def job_from_file(path: str) -> ExportJob:
    """Load a job description from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        checkpoints = tuple(
            CheckpointSpec(
                model_id=c["model_id"],
                kind=c["kind"],
                source=c["source"],
                output_order=c.get("output_order"),
                target_class=c.get("target_class"),
            )
            for c in raw["checkpoints"]
        )
        job = ExportJob(
            input_root=raw["input_root"],
            dataset_name=raw["dataset_name"],
            taxonomy_name=raw["taxonomy_name"],
            class_names=tuple(raw["class_names"]),
            checkpoints=checkpoints,
            manifest_out=raw["manifest_out"],
            scores_out=raw["scores_out"],
            frame_rate=raw.get("frame_rate", 1.0),
            crop_size=raw.get("crop_size", 224),
            detector=raw.get("detector", DETECTOR_NONE),
            seed=raw.get("seed", 0),
            batch_size=raw.get("batch_size", 32),
        )
    except KeyError as exc:
        raise JobError(f"job file {path}: missing field {exc.args[0]!r}") from None
    job.validate()
    return job
