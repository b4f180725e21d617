from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, strategies as st

from forgeval.ensembles import (
    BINARY,
    MULTICLASS,
    PER_MANIPULATION,
    EnsembleConfig,
    ScoreTensor,
    combine_binary_soft,
    combine_multiclass_soft,
    combine_one_vs_real,
    combine_one_vs_rest,
    tensor_violations,
)
from forgeval.records import UNATTRIBUTED_FAKE, g


def make_tensor(rows, kind):
    return ScoreTensor("s", tuple(f"m{i}" for i in range(len(rows))), tuple(map(tuple, rows)), kind)


def normalized_row(width, rng):
    raw = [rng.random() + 1e-9 for _ in range(width)]
    total = math.fsum(raw)
    return tuple(v / total for v in raw)


# Independent brute-force evaluations of the combination rules, kept free of
# the production helpers on purpose.

def oracle_soft(rows):
    width = len(rows[0])
    avg = [math.fsum(row[j] for row in rows) / len(rows) for j in range(width)]
    best = 0
    for j in range(1, width):
        if avg[j] > avg[best]:
            best = j
    return avg, best


def oracle_max_pool(fake_scores, threshold):
    best = 0
    for i in range(1, len(fake_scores)):
        if fake_scores[i] > fake_scores[best]:
            best = i
    if fake_scores[best] > threshold:
        return best + 1
    return 0


class TestBinarySoft:
    def test_two_model_mean(self):
        d = combine_binary_soft(make_tensor([[0.2, 0.8], [0.4, 0.6]], BINARY))
        assert d.fake_score == pytest.approx(0.7, abs=1e-15)
        assert d.z_hat == 1
        assert d.y_hat == UNATTRIBUTED_FAKE

    def test_single_model_identity(self):
        d = combine_binary_soft(make_tensor([[0.9, 0.1]], BINARY))
        assert d.class_scores == (0.9, 0.1)
        assert d.z_hat == 0
        assert d.y_hat == 0

    def test_matches_oracle_on_random_rows(self):
        rng = random.Random(11)
        for _ in range(200):
            rows = [normalized_row(2, rng) for _ in range(5)]
            d = combine_binary_soft(make_tensor(rows, BINARY))
            avg, best = oracle_soft(rows)
            assert d.z_hat == best
            assert max(abs(a - b) for a, b in zip(d.class_scores, avg)) < 1e-12

    def test_rejects_empty_and_wrong_width(self):
        with pytest.raises(ValueError):
            combine_binary_soft(ScoreTensor("s", (), (), BINARY))
        with pytest.raises(ValueError):
            combine_binary_soft(make_tensor([[0.2, 0.3, 0.5]], BINARY))


class TestMulticlassSoft:
    def test_two_model_mean(self):
        d = combine_multiclass_soft(make_tensor([[0.5, 0.3, 0.2], [0.1, 0.5, 0.4]], MULTICLASS))
        assert d.class_scores == pytest.approx((0.3, 0.4, 0.3), abs=1e-15)
        assert d.y_hat == 1
        assert d.z_hat == 1

    def test_identity_real(self):
        d = combine_multiclass_soft(make_tensor([[1.0, 0.0, 0.0]], MULTICLASS))
        assert d.y_hat == 0
        assert d.z_hat == 0
        assert d.fake_score == 0.0

    def test_matches_oracle_on_random_rows(self):
        rng = random.Random(12)
        for _ in range(200):
            rows = [normalized_row(6, rng) for _ in range(6)]
            d = combine_multiclass_soft(make_tensor(rows, MULTICLASS), k=5)
            avg, best = oracle_soft(rows)
            assert d.y_hat == best
            assert d.z_hat == g(best)
            assert max(abs(a - b) for a, b in zip(d.class_scores, avg)) < 1e-12
            assert abs(d.fake_score - math.fsum(avg[1:])) < 1e-12

    def test_width_mismatch_with_k(self):
        with pytest.raises(ValueError):
            combine_multiclass_soft(make_tensor([[0.5, 0.5]], MULTICLASS), k=5)


class TestMaxPooling:
    def config(self, k, t):
        return EnsembleConfig("one-vs-real", k, t)

    def rows_from_scores(self, scores):
        return make_tensor([[1.0 - s, s] for s in scores], PER_MANIPULATION)

    def test_strong_first_specialist(self):
        d = combine_one_vs_real(self.rows_from_scores([0.9, 0.2, 0.1]), self.config(3, 0.5))
        assert (d.y_hat, d.z_hat, d.fake_score) == (1, 1, 0.9)

    def test_all_below_threshold_is_real(self):
        d = combine_one_vs_real(self.rows_from_scores([0.4, 0.45, 0.3]), self.config(3, 0.5))
        assert (d.y_hat, d.z_hat) == (0, 0)

    def test_one_vs_rest_argmax(self):
        d = combine_one_vs_rest(self.rows_from_scores([0.6, 0.8]), EnsembleConfig("one-vs-rest", 2, 0.5))
        assert d.y_hat == 2

    def test_score_equal_to_threshold_is_real(self):
        d = combine_one_vs_rest(self.rows_from_scores([0.5, 0.5]), EnsembleConfig("one-vs-rest", 2, 0.5))
        assert d.y_hat == 0

    def test_matches_oracle_on_random_cases(self):
        rng = random.Random(13)
        for _ in range(1000):
            k = rng.randint(1, 8)
            scores = [rng.random() for _ in range(k)]
            t = rng.random()
            d = combine_one_vs_real(self.rows_from_scores(scores), self.config(k, t))
            assert d.y_hat == oracle_max_pool(scores, t)
            assert d.fake_score == max(scores)

    def test_rest_equals_real_rule(self):
        rng = random.Random(14)
        for _ in range(300):
            scores = [rng.random() for _ in range(4)]
            t = rng.random()
            tensor = self.rows_from_scores(scores)
            a = combine_one_vs_real(tensor, EnsembleConfig("one-vs-real", 4, t))
            b = combine_one_vs_rest(tensor, EnsembleConfig("one-vs-rest", 4, t))
            assert a == b

    def test_specialist_count_mismatch(self):
        with pytest.raises(ValueError):
            combine_one_vs_real(self.rows_from_scores([0.5, 0.5]), self.config(3, 0.5))


# --- properties -------------------------------------------------------------

row_strategy = st.lists(
    st.floats(min_value=1e-6, max_value=1.0, allow_nan=False), min_size=2, max_size=7
).map(lambda xs: tuple(v / math.fsum(xs) for v in xs))


@given(st.integers(min_value=2, max_value=7), st.integers(min_value=1, max_value=6), st.randoms())
def test_decision_consistency_everywhere(width, n, rnd):
    rows = [normalized_row(width, rnd) for _ in range(n)]
    if width == 2:
        d = combine_binary_soft(make_tensor(rows, BINARY))
        assert d.z_hat == (0 if d.y_hat == 0 else 1)
        per_rows = [normalized_row(2, rnd) for _ in range(n)]
        d = combine_one_vs_real(make_tensor(per_rows, PER_MANIPULATION),
                                EnsembleConfig("one-vs-real", n, rnd.random()))
        assert d.z_hat == g(d.y_hat)
    d = combine_multiclass_soft(make_tensor(rows, MULTICLASS))
    assert d.z_hat == g(d.y_hat)


@given(row_strategy, st.integers(min_value=1, max_value=8))
def test_averaging_idempotence_exact(row, n):
    single = combine_multiclass_soft(make_tensor([row], MULTICLASS))
    stacked = combine_multiclass_soft(make_tensor([row] * n, MULTICLASS))
    assert stacked.y_hat == single.y_hat
    assert stacked.z_hat == single.z_hat
    assert stacked.class_scores == single.class_scores


fixed_width_row = st.lists(
    st.floats(min_value=1e-6, max_value=1.0, allow_nan=False), min_size=4, max_size=4
).map(lambda xs: tuple(v / math.fsum(xs) for v in xs))


@given(st.lists(fixed_width_row, min_size=2, max_size=6), st.randoms())
def test_soft_permutation_invariance(rows, rnd):
    base = combine_multiclass_soft(make_tensor(rows, MULTICLASS))
    shuffled = rows[:]
    rnd.shuffle(shuffled)
    assert combine_multiclass_soft(make_tensor(shuffled, MULTICLASS)) == combine_multiclass_soft(
        make_tensor(rows, MULTICLASS)
    )
    assert base.z_hat in (0, 1)


@given(
    st.lists(st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=1, max_size=8),
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
)
def test_threshold_monotonicity(scores, t1, t2):
    if t1 > t2:
        t1, t2 = t2, t1
    k = len(scores)
    tensor = make_tensor([[1.0 - s, s] for s in scores], PER_MANIPULATION)
    low = combine_one_vs_real(tensor, EnsembleConfig("one-vs-real", k, t1))
    high = combine_one_vs_real(tensor, EnsembleConfig("one-vs-real", k, t2))
    # Raising t can only flip a manipulation verdict to real, never retarget it.
    assert high.y_hat in (0, low.y_hat)


def test_tensor_violations_catch_bad_rows():
    bad_sum = make_tensor([[0.5, 0.6]], BINARY)
    assert any("sums to" in p for p in tensor_violations(bad_sum))
    bad_range = make_tensor([[1.2, -0.2]], BINARY)
    assert any("outside [0, 1]" in p for p in tensor_violations(bad_range))
    assert tensor_violations(make_tensor([[0.3, 0.7]], BINARY)) == []
