"""Deterministic synthetic manifests and score files with tunable models.

Each emitted probability vector is a softmax over a noisy class-affinity
vector whose peak is placed on the true class with the model's accuracy
target; sharpness is the softmax inverse temperature. Randomness is drawn
from streams keyed by (seed, purpose, model index) and indexed by sample
position, so output is independent of generation order or parallelism.
A correlation knob mixes in a latent error source shared with model 0, which
makes model mistakes co-occur and shrinks ensemble gains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .ensembles import BINARY, KINDS, MULTICLASS, PER_MANIPULATION
from .formats import DatasetManifest, LABEL_MODE_FULL, ScoreSet
from .records import FaceRecord, Taxonomy


@dataclass(frozen=True)
class ModelSpec:
    model_id: str
    kind: str
    accuracy: float  # P(argmax == true class), per sample
    sharpness: float = 4.0
    correlation: float = 0.0  # error-source coupling with model 0
    # per-manipulation only: accuracy on manipulations other than the model's
    # own target (None means same as accuracy)
    confusion_accuracy: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not (0.0 < self.accuracy < 1.0):
            raise ValueError("accuracy target must lie in (0, 1)")
        if self.sharpness <= 0:
            raise ValueError("sharpness must be positive")
        if not (0.0 <= self.correlation <= 1.0):
            raise ValueError("correlation must lie in [0, 1]")


@dataclass(frozen=True)
class OracleConfig:
    seed: int
    k: int
    samples_per_class: int
    models: Tuple[ModelSpec, ...]
    dataset_name: str = "synthetic"
    taxonomy_name: str = "synthetic-tax"

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.samples_per_class < 1:
            raise ValueError("samples_per_class must be >= 1")
        if not self.models:
            raise ValueError("need at least one model spec")
        kinds = {m.kind for m in self.models}
        if len(kinds) != 1:
            raise ValueError("all models in one roster must share a kind")
        if self.models[0].kind == PER_MANIPULATION and len(self.models) != self.k:
            raise ValueError("per-manipulation rosters need exactly k models")

    @property
    def kind(self) -> str:
        return self.models[0].kind


def _preset_models(kind, n, accuracy, sharpness, correlation, confusion=None):
    return tuple(
        ModelSpec(f"m{i}", kind, accuracy, sharpness, correlation, confusion)
        for i in range(n)
    )


PRESETS = {
    # Near-separable specialists: high thresholds and low thresholds both work.
    "confident": OracleConfig(
        seed=0,
        k=5,
        samples_per_class=1000,
        models=_preset_models(PER_MANIPULATION, 5, 0.999, 16.0, 0.0),
    ),
    # Independent mediocre attribution models: averaging should help a lot.
    "weak-diverse": OracleConfig(
        seed=0,
        k=5,
        samples_per_class=2000,
        models=_preset_models(MULTICLASS, 6, 0.75, 1.5, 0.0),
    ),
    # Same models but errors co-occur: the ensemble gain should collapse.
    "weak-correlated": OracleConfig(
        seed=0,
        k=5,
        samples_per_class=2000,
        models=_preset_models(MULTICLASS, 6, 0.75, 1.5, 0.9),
    ),
    # Specialists that are sharp on their own manipulation, near chance elsewhere.
    "specialists": OracleConfig(
        seed=0,
        k=5,
        samples_per_class=500,
        models=_preset_models(PER_MANIPULATION, 5, 0.95, 4.0, 0.0, 0.6),
    ),
}


def preset(name: str, seed: int = 0) -> OracleConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    base = PRESETS[name]
    return OracleConfig(
        seed=seed,
        k=base.k,
        samples_per_class=base.samples_per_class,
        models=base.models,
        dataset_name=f"synthetic-{name}",
        taxonomy_name=base.taxonomy_name,
    )


def _rng(cfg: OracleConfig, *stream) -> np.random.Generator:
    return np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, *stream])


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exped = np.exp(shifted)
    return exped / exped.sum(axis=1, keepdims=True)


def _peaked_probs(
    rng: np.random.Generator, chosen: np.ndarray, width: int, sharpness: float
) -> np.ndarray:
    """Probability rows whose argmax is exactly the chosen class."""
    n = chosen.shape[0]
    logits = rng.normal(0.0, 1.0, size=(n, width))
    gap = 0.5 + np.abs(rng.normal(0.0, 0.5, size=n))
    rows = np.arange(n)
    logits[rows, chosen] = logits.max(axis=1) + gap
    return _softmax(sharpness * logits)


def _effective_draws(cfg, model_index, spec, n):
    """Per-sample uniforms for correctness and wrong-class choice, optionally
    replaced by the latent draws shared with model 0."""
    shared = _rng(cfg, 0)
    u_shared = shared.uniform(size=n)
    w_shared = shared.uniform(size=n)
    own = _rng(cfg, 1, model_index)
    couple = own.uniform(size=n)
    u = own.uniform(size=n)
    w = own.uniform(size=n)
    if model_index > 0 and spec.correlation > 0:
        use_shared = couple < spec.correlation
        u = np.where(use_shared, u_shared, u)
        w = np.where(use_shared, w_shared, w)
    elif model_index == 0:
        # Model 0 *is* the latent source others may couple to.
        u, w = u_shared, w_shared
    return u, w, own


def _model_rows(cfg: OracleConfig, model_index: int, y: np.ndarray) -> np.ndarray:
    spec = cfg.models[model_index]
    n = y.shape[0]
    u, w, own = _effective_draws(cfg, model_index, spec, n)

    if spec.kind == MULTICLASS:
        width = cfg.k + 1
        correct = u < spec.accuracy
        wrong = (y + 1 + np.floor(w * cfg.k).astype(np.int64)) % (cfg.k + 1)
        chosen = np.where(correct, y, wrong)
    elif spec.kind == BINARY:
        width = 2
        truth = (y > 0).astype(np.int64)
        correct = u < spec.accuracy
        chosen = np.where(correct, truth, 1 - truth)
    else:  # per-manipulation specialist for class model_index + 1
        width = 2
        target = model_index + 1
        truth = (y == target).astype(np.int64)
        off_accuracy = (
            spec.accuracy if spec.confusion_accuracy is None else spec.confusion_accuracy
        )
        acc = np.where((y == target) | (y == 0), spec.accuracy, off_accuracy)
        correct = u < acc
        chosen = np.where(correct, truth, 1 - truth)

    noise_rng = _rng(cfg, 2, model_index)
    return _peaked_probs(noise_rng, chosen, width, spec.sharpness)


def true_labels(cfg: OracleConfig) -> np.ndarray:
    """Block layout: samples_per_class samples of each class 0..k, in order."""
    return np.repeat(np.arange(cfg.k + 1), cfg.samples_per_class)


def generate_probs(cfg: OracleConfig) -> Tuple[np.ndarray, List[np.ndarray]]:
    """True labels plus one probability matrix per model.

    Same values generate() serializes, exposed as arrays for in-memory
    evaluation at scale.
    """
    y = true_labels(cfg)
    return y, [_model_rows(cfg, i, y) for i in range(len(cfg.models))]


def generate(cfg: OracleConfig) -> Tuple[DatasetManifest, ScoreSet]:
    """Deterministic manifest + score set; identical configs give identical bytes."""
    y = true_labels(cfg)
    n = y.shape[0]
    taxonomy = Taxonomy(
        cfg.taxonomy_name, ("real",) + tuple(f"method{i}" for i in range(1, cfg.k + 1))
    )
    records = [
        FaceRecord(
            sample_id=f"s{i:07d}",
            video_id=f"v{i:07d}",
            frame_index=0,
            identity_id="id0",
            label_y=int(y[i]),
            label_z=0 if y[i] == 0 else 1,
        )
        for i in range(n)
    ]
    manifest = DatasetManifest(cfg.dataset_name, taxonomy, records, LABEL_MODE_FULL)

    rows = {}
    for model_index, spec in enumerate(cfg.models):
        probs = _model_rows(cfg, model_index, y)
        for i in range(n):
            rows[(records[i].sample_id, spec.model_id)] = tuple(probs[i])
    roster = tuple((spec.model_id, spec.kind) for spec in cfg.models)
    return manifest, ScoreSet(taxonomy.name, roster, rows)


def measured_accuracy(cfg: OracleConfig) -> List[float]:
    """Fraction of samples where each model's argmax hits its per-model truth."""
    y = true_labels(cfg)
    out = []
    for model_index, spec in enumerate(cfg.models):
        probs = _model_rows(cfg, model_index, y)
        pred = probs.argmax(axis=1)
        if spec.kind == MULTICLASS:
            truth = y
        elif spec.kind == BINARY:
            truth = (y > 0).astype(np.int64)
        else:
            truth = (y == model_index + 1).astype(np.int64)
        out.append(float((pred == truth).mean()))
    return out
