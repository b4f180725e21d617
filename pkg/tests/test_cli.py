from __future__ import annotations

import json

import pytest

from factories import small_manifest, random_scoreset
from forgeval import formats
from forgeval.cli import EXIT_MISMATCH, EXIT_OK, EXIT_VALIDATION, main


@pytest.fixture
def scored_dataset(tmp_path):
    manifest = small_manifest(k=3, n_per_class=10, faces_per_video=5)
    scores = random_scoreset(manifest, "multiclass", n_models=4, seed=8)
    manifest_path = tmp_path / "manifest.txt"
    scores_path = tmp_path / "scores.txt"
    formats.write_manifest(manifest, str(manifest_path))
    formats.write_scores(scores, str(scores_path))
    return manifest_path, scores_path


class TestValidate:
    def test_clean_pair(self, scored_dataset):
        manifest_path, scores_path = scored_dataset
        assert main(["validate", "--manifest", str(manifest_path),
                     "--scores", str(scores_path)]) == EXIT_OK

    def test_manifest_only(self, scored_dataset):
        manifest_path, _ = scored_dataset
        assert main(["validate", "--manifest", str(manifest_path)]) == EXIT_OK

    def test_corrupted_score_line(self, scored_dataset, tmp_path, capsys):
        manifest_path, scores_path = scored_dataset
        broken = tmp_path / "broken.txt"
        lines = scores_path.read_text().splitlines()
        lines[10] = lines[10].rsplit(",", 1)[0] + ",0.9"  # breaks the row sum
        broken.write_text("\n".join(lines) + "\n")
        assert main(["validate", "--manifest", str(manifest_path),
                     "--scores", str(broken)]) == EXIT_VALIDATION
        assert ":11:" in capsys.readouterr().out

    def test_missing_coverage(self, scored_dataset, tmp_path):
        manifest_path, scores_path = scored_dataset
        pruned = tmp_path / "pruned.txt"
        lines = scores_path.read_text().splitlines()
        del lines[10]
        pruned.write_text("\n".join(lines) + "\n")
        assert main(["validate", "--manifest", str(manifest_path),
                     "--scores", str(pruned)]) == EXIT_VALIDATION


class TestEvaluate:
    def test_writes_report(self, scored_dataset, tmp_path):
        manifest_path, scores_path = scored_dataset
        out = tmp_path / "report.json"
        code = main(["evaluate", "--manifest", str(manifest_path), "--scores", str(scores_path),
                     "--design", "multiclass-soft", "--task", "attribution", "--out", str(out)])
        assert code == EXIT_OK
        document = json.loads(out.read_text())
        assert document["format_version"] == "forgeval-report v1"
        assert document["task"] == "attribution"
        assert document["level"] == "face"
        assert 0.0 <= document["balanced_accuracy"] <= 1.0
        assert len(document["confusion_matrix"]) == 4

    def test_same_invocation_is_byte_identical(self, scored_dataset, tmp_path):
        manifest_path, scores_path = scored_dataset
        args = ["evaluate", "--manifest", str(manifest_path), "--scores", str(scores_path),
                "--design", "multiclass-soft", "--task", "detection"]
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(args + ["--out", str(out_a)]) == EXIT_OK
        assert main(args + ["--out", str(out_b)]) == EXIT_OK
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_attribution_needs_attribution_labels(self, tmp_path):
        manifest = small_manifest(k=2, n_per_class=4, label_mode="detection-only")
        scores = random_scoreset(manifest, "multiclass", n_models=2)
        manifest_path, scores_path = tmp_path / "m.txt", tmp_path / "s.txt"
        formats.write_manifest(manifest, str(manifest_path))
        formats.write_scores(scores, str(scores_path))
        code = main(["evaluate", "--manifest", str(manifest_path), "--scores", str(scores_path),
                     "--design", "multiclass-soft", "--task", "attribution",
                     "--out", str(tmp_path / "r.json")])
        assert code == EXIT_MISMATCH

    def test_design_roster_mismatch(self, scored_dataset, tmp_path):
        manifest_path, scores_path = scored_dataset
        code = main(["evaluate", "--manifest", str(manifest_path), "--scores", str(scores_path),
                     "--design", "one-vs-real", "--task", "detection",
                     "--out", str(tmp_path / "r.json")])
        assert code == EXIT_MISMATCH

    def test_video_level(self, scored_dataset, tmp_path):
        manifest_path, scores_path = scored_dataset
        out = tmp_path / "video.json"
        code = main(["evaluate", "--manifest", str(manifest_path), "--scores", str(scores_path),
                     "--design", "multiclass-soft", "--task", "detection",
                     "--level", "video", "--out", str(out)])
        assert code == EXIT_OK
        assert json.loads(out.read_text())["level"] == "video"


class TestSweep:
    @pytest.fixture
    def per_manip_dataset(self, tmp_path):
        manifest = small_manifest(k=3, n_per_class=10)
        scores = random_scoreset(manifest, "per-manipulation", seed=4)
        manifest_path, scores_path = tmp_path / "m.txt", tmp_path / "s.txt"
        formats.write_manifest(manifest, str(manifest_path))
        formats.write_scores(scores, str(scores_path))
        return manifest_path, scores_path

    def test_default_grid_has_19_rows(self, per_manip_dataset, tmp_path):
        manifest_path, scores_path = per_manip_dataset
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--manifest", str(manifest_path), "--scores", str(scores_path),
                     "--design", "one-vs-real", "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "threshold,ba_detection,ba_attribution"
        assert len(lines) == 20
        assert lines[1].startswith("0.05,") and lines[-1].startswith("0.95,")

    def test_single_point_grid_matches_evaluate(self, per_manip_dataset, tmp_path):
        manifest_path, scores_path = per_manip_dataset
        csv_out = tmp_path / "sweep.csv"
        assert main(["sweep", "--manifest", str(manifest_path), "--scores", str(scores_path),
                     "--design", "one-vs-rest", "--grid", "0.5:0.5:0.1",
                     "--task", "detection", "--out", str(csv_out)]) == EXIT_OK
        report_out = tmp_path / "report.json"
        assert main(["evaluate", "--manifest", str(manifest_path), "--scores", str(scores_path),
                     "--design", "one-vs-rest", "--threshold", "0.5",
                     "--task", "detection", "--out", str(report_out)]) == EXIT_OK
        sweep_ba = float(csv_out.read_text().splitlines()[1].split(",")[1])
        assert sweep_ba == json.loads(report_out.read_text())["balanced_accuracy"]


class TestAggregate:
    def test_verdicts_and_permuted_manifest(self, scored_dataset, tmp_path):
        manifest_path, scores_path = scored_dataset
        out_a = tmp_path / "a.verdicts"
        assert main(["aggregate", "--manifest", str(manifest_path), "--scores", str(scores_path),
                     "--design", "multiclass-soft", "--out", str(out_a)]) == EXIT_OK
        # Permute manifest record lines; verdicts must not change.
        lines = manifest_path.read_text().splitlines()
        permuted = lines[:5] + list(reversed(lines[5:]))
        permuted_path = tmp_path / "permuted.txt"
        permuted_path.write_text("\n".join(permuted) + "\n")
        out_b = tmp_path / "b.verdicts"
        assert main(["aggregate", "--manifest", str(permuted_path), "--scores", str(scores_path),
                     "--design", "multiclass-soft", "--out", str(out_b)]) == EXIT_OK
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_video_report(self, scored_dataset, tmp_path):
        manifest_path, scores_path = scored_dataset
        out = tmp_path / "v.verdicts"
        report = tmp_path / "v.json"
        assert main(["aggregate", "--manifest", str(manifest_path), "--scores", str(scores_path),
                     "--design", "multiclass-soft", "--out", str(out),
                     "--report", str(report)]) == EXIT_OK
        assert json.loads(report.read_text())["level"] == "video"


class TestSimulate:
    def test_outputs_pass_validation(self, tmp_path):
        out = tmp_path / "sim"
        assert main(["simulate", "--preset", "specialists", "--seed", "7",
                     "--out", str(out)]) == EXIT_OK
        assert main(["validate", "--manifest", str(out / "manifest.txt"),
                     "--scores", str(out / "scores.txt")]) == EXIT_OK

    def test_same_seed_identical_files(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["simulate", "--preset", "specialists", "--seed", "5",
                         "--out", str(out)]) == EXIT_OK
        assert (a / "manifest.txt").read_bytes() == (b / "manifest.txt").read_bytes()
        assert (a / "scores.txt").read_bytes() == (b / "scores.txt").read_bytes()
