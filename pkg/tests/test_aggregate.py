from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from forgeval.aggregate import (
    aggregate_identity,
    aggregate_video,
    build_verdicts,
    video_truth,
)
from forgeval.ensembles import Decision
from forgeval.records import FaceRecord


def fake_decision(sample_id, score):
    z = 1 if score > 0.5 else 0
    return Decision(sample_id, z, z, fake_score=score, class_scores=(1 - score, score))


class TestIdentityFold:
    def test_mean(self):
        assert aggregate_identity([0.2, 0.4, 0.6]) == pytest.approx(0.4, abs=1e-15)

    def test_singleton(self):
        assert aggregate_identity([0.7]) == 0.7

    def test_permutation_symmetry(self):
        rng = random.Random(31)
        scores = [rng.random() for _ in range(9)]
        shuffled = scores[:]
        rng.shuffle(shuffled)
        assert aggregate_identity(sorted(scores)) == aggregate_identity(sorted(shuffled))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_identity([])

    def test_other_folds(self):
        assert aggregate_identity([0.1, 0.9], how="max") == 0.9
        assert aggregate_identity([0.1, 0.5, 0.9], how="median") == 0.5


class TestVideoFold:
    def test_max_rule(self):
        verdict = aggregate_video("v1", {"A": 0.4, "B": 0.9}, contributing_faces=4)
        assert verdict.video_fake_score == 0.9
        assert verdict.video_z_hat == 1

    def test_single_identity_below_threshold(self):
        verdict = aggregate_video("v1", {"A": 0.4}, contributing_faces=1)
        assert verdict.video_fake_score == 0.4
        assert verdict.video_z_hat == 0

    def test_random_maps_match_brute_force(self):
        rng = random.Random(32)
        for _ in range(300):
            identities = {f"id{i}": rng.random() for i in range(rng.randint(1, 6))}
            t = rng.random()
            verdict = aggregate_video("v", identities, 1, threshold=t)
            assert verdict.video_fake_score == max(identities.values())
            assert verdict.video_z_hat == (1 if max(identities.values()) > t else 0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_video("v1", {}, 0)


def build_video(rng, video_id, n_faces, n_identities):
    records, decisions = [], {}
    for i in range(n_faces):
        sid = f"{video_id}_f{i}"
        records.append(
            FaceRecord(sid, video_id, i, f"id{rng.randrange(n_identities)}", None, None)
        )
        decisions[sid] = fake_decision(sid, rng.random())
    return records, decisions


class TestBuildVerdicts:
    def test_single_face_video_equals_face_decision(self):
        records = [FaceRecord("s1", "v1", 0, "idA", None, None)]
        decisions = {"s1": fake_decision("s1", 0.83)}
        (verdict,) = build_verdicts(records, decisions)
        assert verdict.video_fake_score == 0.83
        assert verdict.contributing_faces == 1

    def test_permutation_invariance(self):
        rng = random.Random(33)
        records, decisions = build_video(rng, "v1", 12, 3)
        base = build_verdicts(records, decisions)
        shuffled = records[:]
        rng.shuffle(shuffled)
        assert build_verdicts(shuffled, decisions) == base

    def test_monotonicity_in_any_face_score(self):
        rng = random.Random(34)
        records, decisions = build_video(rng, "v1", 8, 2)
        (base,) = build_verdicts(records, decisions)
        bumped = dict(decisions)
        target = records[3].sample_id
        bumped[target] = fake_decision(target, min(1.0, decisions[target].fake_score + 0.3))
        (after,) = build_verdicts(records, bumped)
        assert after.video_fake_score >= base.video_fake_score


@given(st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1, max_size=10),
       st.randoms())
def test_verdict_invariant_under_face_order(scores, rnd):
    records = [FaceRecord(f"s{i}", "v", i, f"id{i % 3}", None, None) for i in range(len(scores))]
    decisions = {f"s{i}": fake_decision(f"s{i}", s) for i, s in enumerate(scores)}
    base = build_verdicts(records, decisions)
    shuffled = records[:]
    rnd.shuffle(shuffled)
    assert build_verdicts(shuffled, decisions) == base
    assert 0.0 <= base[0].video_fake_score <= 1.0


class TestVideoTruth:
    def test_fake_iff_any_face_fake(self):
        records = [
            FaceRecord("a", "v1", 0, "id0", 0, 0),
            FaceRecord("b", "v1", 1, "id0", 2, 1),
            FaceRecord("c", "v2", 0, "id0", 0, 0),
        ]
        assert video_truth(records) == {"v1": 1, "v2": 0}

    def test_unlabeled_face_blocks_video(self):
        records = [
            FaceRecord("a", "v1", 0, "id0", None, None),
            FaceRecord("b", "v1", 1, "id0", 0, 0),
        ]
        assert video_truth(records) == {"v1": None}
