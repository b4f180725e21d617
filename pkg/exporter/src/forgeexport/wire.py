"""Writers for the engine's line-delimited manifest and score formats.

This module deliberately re-implements the wire grammar instead of importing
the engine: the exporter's only contract with the engine is the byte format,
and the engine's own validator is the conformance gate in tests.
"""

from __future__ import annotations

from typing import Dict, Sequence, Tuple

MANIFEST_MAGIC = "#forgeval-manifest v1"
SCORES_MAGIC = "#forgeval-scores v1"
LABEL_MODE_FULL = "full"


def format_score(value: float) -> str:
    return format(value, ".9g")


def manifest_text(dataset_name: str, taxonomy_name: str, class_names: Sequence[str],
                  records: Sequence[Tuple[str, str, int, str, str]]) -> str:
    """Render manifest lines from (sample_id, video_id, frame_index,
    identity_id, class_name) records, sorted by sample id."""
    class_set = set(class_names)
    out = [
        MANIFEST_MAGIC,
        f"#dataset={dataset_name}",
        f"#taxonomy={taxonomy_name}",
        f"#classes={','.join(class_names)}",
        f"#label_mode={LABEL_MODE_FULL}",
    ]
    for sample_id, video_id, frame_index, identity_id, class_name in sorted(records):
        if class_name not in class_set:
            raise ValueError(f"record {sample_id!r} labeled with unknown class {class_name!r}")
        z = 0 if class_name == class_names[0] else 1
        out.append(f"{sample_id},{video_id},{frame_index},{identity_id},{class_name},{z}")
    return "\n".join(out) + "\n"


def scores_text(taxonomy_name: str, roster: Sequence[Tuple[str, str]],
                rows: Dict[Tuple[str, str], Tuple[float, ...]]) -> str:
    """Render score lines keyed by (sample_id, model_id), sorted by sample
    then roster position."""
    out = [SCORES_MAGIC, f"#taxonomy={taxonomy_name}"]
    for model_id, kind in roster:
        out.append(f"#model={model_id}:{kind}")
    order = {model_id: i for i, (model_id, _) in enumerate(roster)}
    for sample_id, model_id in sorted(rows, key=lambda key: (key[0], order[key[1]])):
        values = ",".join(format_score(v) for v in rows[(sample_id, model_id)])
        out.append(f"{sample_id},{model_id},{values}")
    return "\n".join(out) + "\n"


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
