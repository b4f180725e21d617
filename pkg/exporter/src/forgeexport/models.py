"""Checkpoint adapters: load a classifier and get normalized probabilities.

Supported sources:
  - ``stub:<logit>,<logit>,...`` — constant logits for every input, used for
    wiring tests and format conformance checks.
  - a ``.pt``/``.pth`` path — a TorchScript module taking an NCHW float
    batch and returning an (N, width) logit tensor (requires torch).
"""

from __future__ import annotations

import os
from typing import Callable, Sequence

import numpy as np

from .job import CheckpointSpec, JobError, ORDER_FAKE_FIRST

Predictor = Callable[[np.ndarray], np.ndarray]

STUB_PREFIX = "stub:"


class CheckpointError(ValueError):
    """A checkpoint that cannot be loaded or returns the wrong shape."""


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, renormalized so each row sums to exactly 1.0
    in floating point (the wire format requires unit row sums)."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _stub_predictor(spec: CheckpointSpec) -> Predictor:
    body = spec.source[len(STUB_PREFIX):]
    try:
        logits = np.array([float(v) for v in body.split(",")], dtype=np.float64)
    except ValueError:
        raise CheckpointError(
            f"checkpoint {spec.model_id!r}: bad stub logits {body!r}"
        ) from None
    if logits.size < 2:
        raise CheckpointError(f"checkpoint {spec.model_id!r}: stub needs >= 2 logits")

    def predict(batch: np.ndarray) -> np.ndarray:
        return np.tile(logits, (batch.shape[0], 1))

    return predict


def _torchscript_predictor(spec: CheckpointSpec) -> Predictor:
    try:
        import torch
    except ImportError:
        raise CheckpointError(
            f"checkpoint {spec.model_id!r}: loading {spec.source!r} requires torch"
        ) from None
    if not os.path.isfile(spec.source):
        raise CheckpointError(f"checkpoint {spec.model_id!r}: no file {spec.source!r}")
    module = torch.jit.load(spec.source, map_location="cpu")
    module.eval()

    def predict(batch: np.ndarray) -> np.ndarray:
        tensor = torch.from_numpy(np.ascontiguousarray(batch.transpose(0, 3, 1, 2)))
        with torch.no_grad():
            out = module(tensor)
        return out.cpu().numpy().astype(np.float64)

    return predict


def load_predictor(spec: CheckpointSpec) -> Predictor:
    if spec.source.startswith(STUB_PREFIX):
        return _stub_predictor(spec)
    return _torchscript_predictor(spec)


def predict_probabilities(spec: CheckpointSpec, predictor: Predictor,
                          batch: np.ndarray, expected_width: int) -> np.ndarray:
    """Run one batch and return (N, expected_width) probabilities with the
    real class in column 0. A width mismatch is fatal, never padded."""
    logits = np.asarray(predictor(batch))
    if logits.ndim != 2 or logits.shape[0] != batch.shape[0]:
        raise CheckpointError(
            f"checkpoint {spec.model_id!r}: expected ({batch.shape[0]}, "
            f"{expected_width}) outputs, got shape {logits.shape}"
        )
    if logits.shape[1] != expected_width:
        raise CheckpointError(
            f"checkpoint {spec.model_id!r} declares kind {spec.kind!r} "
            f"(width {expected_width}) but emits width {logits.shape[1]}"
        )
    probs = softmax(logits)
    if spec.output_order == ORDER_FAKE_FIRST:
        probs = probs[:, ::-1]
    return probs


def batches(array_count: int, batch_size: int) -> Sequence[slice]:
    if batch_size <= 0:
        raise JobError(f"batch_size must be positive, got {batch_size}")
    return [slice(i, i + batch_size) for i in range(0, array_count, batch_size)]
