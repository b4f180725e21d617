"""Checkpoint adapter tests: softmax oracle, ordering, width enforcement."""

import math

import numpy as np
import pytest

from forgeexport.job import CheckpointSpec
from forgeexport.models import (
    CheckpointError,
    load_predictor,
    predict_probabilities,
    softmax,
)


def test_softmax_matches_hand_computed_oracle():
    row = softmax(np.array([2.0, 0.0]))
    # exp(2) / (exp(2) + 1) and 1 / (exp(2) + 1), computed independently
    assert abs(row[0] - 0.880797) < 1e-5
    assert abs(row[1] - 0.119203) < 1e-5
    oracle = math.exp(2.0) / (math.exp(2.0) + 1.0)
    assert abs(row[0] - oracle) < 1e-12


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(3)
    logits = rng.normal(scale=50.0, size=(100, 6))
    probs = softmax(logits)
    assert np.all(probs >= 0.0)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_stub_predictor_is_constant():
    spec = CheckpointSpec("m", "binary", "stub:1.5,-0.5", output_order="real-first")
    predictor = load_predictor(spec)
    batch = np.zeros((3, 8, 8, 3), dtype=np.float32)
    out = predictor(batch)
    assert out.shape == (3, 2)
    assert np.all(out == out[0])


def test_fake_first_order_swaps_columns():
    batch = np.zeros((1, 4, 4, 3), dtype=np.float32)
    real_first = CheckpointSpec("a", "binary", "stub:2.0,0.0", output_order="real-first")
    fake_first = CheckpointSpec("b", "binary", "stub:2.0,0.0", output_order="fake-first")
    row_rf = predict_probabilities(real_first, load_predictor(real_first), batch, 2)[0]
    row_ff = predict_probabilities(fake_first, load_predictor(fake_first), batch, 2)[0]
    assert tuple(row_rf) == tuple(row_ff[::-1])


def test_width_mismatch_is_fatal():
    spec = CheckpointSpec("m", "binary", "stub:1.0,2.0,3.0", output_order="real-first")
    batch = np.zeros((2, 4, 4, 3), dtype=np.float32)
    with pytest.raises(CheckpointError, match="width"):
        predict_probabilities(spec, load_predictor(spec), batch, 2)


def test_bad_stub_source_rejected():
    with pytest.raises(CheckpointError):
        load_predictor(CheckpointSpec("m", "binary", "stub:x,y", output_order="real-first"))
    with pytest.raises(CheckpointError):
        load_predictor(CheckpointSpec("m", "binary", "stub:1.0", output_order="real-first"))
