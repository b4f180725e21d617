"""Label space, face records, and the attribution-to-detection label map."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

REAL_CLASS = 0
REAL_CLASS_NAME = "real"

# Attribution marker used when a decision knows the face is fake but the
# ensemble design cannot name the manipulation (binary soft voting).
UNATTRIBUTED_FAKE = -1

# Engineering cap on the number of manipulation classes, not a domain claim.
MAX_MANIPULATIONS = 64

_ID_ALLOWED = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._:/-")


def is_valid_identifier(value: str) -> bool:
    """Opaque ids must be non-empty and free of separators/whitespace."""
    return bool(value) and all(ch in _ID_ALLOWED for ch in value)


def g(y: int) -> int:
    """Map an attribution label to a detection label: 0 stays real, anything else is fake."""
    return 0 if y == REAL_CLASS else 1


@dataclass(frozen=True)
class Taxonomy:
    """Ordered class names; position 0 is always the real class."""

    name: str
    class_names: tuple

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if not is_valid_identifier(self.name):
            raise ValueError(f"invalid taxonomy name {self.name!r}")
        if len(self.class_names) < 2:
            raise ValueError("taxonomy needs at least one manipulation class")
        if len(self.class_names) - 1 > MAX_MANIPULATIONS:
            raise ValueError(f"taxonomy exceeds {MAX_MANIPULATIONS} manipulation classes")
        if self.class_names[0] != REAL_CLASS_NAME:
            raise ValueError(f"class 0 must be named {REAL_CLASS_NAME!r}")
        if len(set(self.class_names)) != len(self.class_names):
            raise ValueError("duplicate class names in taxonomy")
        for name in self.class_names:
            if not is_valid_identifier(name):
                raise ValueError(f"invalid class name {name!r}")

    @property
    def k(self) -> int:
        """Number of manipulation classes (real excluded)."""
        return len(self.class_names) - 1

    def class_index(self, name: str) -> int:
        try:
            return self.class_names.index(name)
        except ValueError:
            raise KeyError(f"unknown class name {name!r} in taxonomy {self.name!r}") from None


@dataclass(frozen=True)
class FaceRecord:
    """One face observation: identifiers plus optional ground-truth labels."""

    sample_id: str
    video_id: str
    frame_index: int
    identity_id: str
    label_y: Optional[int] = None
    label_z: Optional[int] = None


def validate_record(record: FaceRecord, taxonomy: Taxonomy) -> List[str]:
    """Return every violated invariant of a record; an empty list means ok."""
    violations: List[str] = []
    for field in ("sample_id", "video_id", "identity_id"):
        if not is_valid_identifier(getattr(record, field)):
            violations.append(f"invalid {field} {getattr(record, field)!r}")
    if record.frame_index < 0:
        violations.append(f"negative frame_index {record.frame_index}")
    if record.label_y is not None and not (0 <= record.label_y <= taxonomy.k):
        violations.append(f"class index {record.label_y} out of range 0..{taxonomy.k}")
    if record.label_z is not None and record.label_z not in (0, 1):
        violations.append(f"detection label {record.label_z} not binary")
    if (
        record.label_y is not None
        and record.label_z is not None
        and 0 <= record.label_y <= taxonomy.k
        and record.label_z in (0, 1)
        and record.label_z != g(record.label_y)
    ):
        violations.append(
            f"detection label {record.label_z} inconsistent with attribution label "
            f"{record.label_y} (expected {g(record.label_y)})"
        )
    return violations


def records_consistent(records: Sequence[FaceRecord], taxonomy: Taxonomy) -> List[str]:
    """Validate a batch, including sample_id uniqueness across the batch."""
    violations: List[str] = []
    seen = set()
    for record in records:
        for v in validate_record(record, taxonomy):
            violations.append(f"{record.sample_id}: {v}")
        if record.sample_id in seen:
            violations.append(f"duplicate sample_id {record.sample_id}")
        seen.add(record.sample_id)
    return violations
