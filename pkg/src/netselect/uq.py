"""Confidence in the selected model via held-out selection correctness.

The training data is split into B stratified subsets.  For each subset, a
full ensemble trained on the complement classifies the subset's samples; the
indicator of a correct selection becomes a new binary outcome, which is then
regressed on the original predictors (log-loss ensemble over the base
learners plus logistic regression).  The fitted regression evaluated at an
observed network's statistics estimates the probability that the selection
for that network is correct.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .ensemble import LOGLOSS, SuperLearnerModel, fit_super_learner, assign_folds
from .learners import DEFAULT_LIBRARY, Dataset, LearnerSpec
from .rng import derive_seed

UQ_REGRESSION_LIBRARY = DEFAULT_LIBRARY + (LearnerSpec.logistic(),)
_CLAMP = 1e-6


@dataclass(frozen=True)
class UQConfig:
    """Settings for the correctness regression.

    ``n_splits`` is the number of held-out subsets used to label selection
    correctness; ``selection_library`` drives the model-selection ensembles
    and ``regression_library`` the confidence regression.
    """

    n_splits: int = 10
    n_folds: int = 5
    seed: int = 0
    cutoff: float = 0.5
    selection_library: tuple = DEFAULT_LIBRARY
    regression_library: tuple = UQ_REGRESSION_LIBRARY

    def __post_init__(self):
        if self.n_splits < 2:
            raise ValueError(f"n_splits must be at least 2, got {self.n_splits}")


@dataclass(frozen=True)
class CorrectnessLabels:
    """Per-sample indicator that the held-out ensemble picked the true model."""

    w: np.ndarray
    split_of: np.ndarray
    split_accuracy: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.w.mean())


def compute_oob_labels(d: Dataset, cfg: UQConfig) -> CorrectnessLabels:
    """Label each sample by the correctness of its held-out classifier.

    For each split b, a full ensemble (cutoff per config) is trained on all
    other splits and classifies every sample of split b, so no sample is
    ever scored by a model that saw its own split.
    """
    splits = assign_folds(d.labels, cfg.n_splits, derive_seed(cfg.seed, 11))
    w = np.zeros(d.n_samples, dtype=np.int64)
    accuracy = np.empty(cfg.n_splits, dtype=np.float64)
    for b in range(cfg.n_splits):
        rows = splits.fold_rows[b]
        model = fit_super_learner(
            d.subset(splits.fold_of != b),
            library=cfg.selection_library,
            n_folds=cfg.n_folds,
            seed=derive_seed(cfg.seed, 13, b),
            mode="full",
            cutoff=cfg.cutoff,
        )
        chosen = model.classify_many(d.features[rows])
        w[rows] = (chosen == d.labels[rows]).astype(np.int64)
        accuracy[b] = float(w[rows].mean())
    return CorrectnessLabels(
        w=w, split_of=splits.fold_of.copy(), split_accuracy=accuracy
    )


@dataclass(frozen=True)
class UQModel:
    """Fitted correctness regression; constant when the labels are degenerate."""

    constant: float | None = None
    model: SuperLearnerModel | None = None

    def confidence(self, x) -> float:
        if self.constant is not None:
            return self.constant
        if hasattr(x, "to_array"):
            x = x.to_array()
        return float(np.clip(self.model.predict(x), 0.0, 1.0))

    def confidences(self, features: np.ndarray) -> np.ndarray:
        if self.constant is not None:
            return np.full(np.asarray(features).shape[0], self.constant)
        return np.clip(self.model.scores(features), 0.0, 1.0)


def fit_uq(d: Dataset, labels, cfg: UQConfig) -> UQModel:
    """Regress selection correctness on the predictors under log-loss.

    Constant (or nearly constant) correctness labels cannot be stratified
    into folds; the fit then degenerates to the observed rate, clamped away
    from 0 and 1 so the implied likelihood stays finite.
    """
    w = labels.w if isinstance(labels, CorrectnessLabels) else np.asarray(labels)
    w = w.astype(np.int64)
    if w.shape[0] != d.n_samples:
        raise ValueError("labels do not match dataset")
    ones = int(w.sum())
    zeros = w.size - ones
    if min(ones, zeros) < cfg.n_folds:
        rate = float(np.clip(w.mean(), _CLAMP, 1.0 - _CLAMP))
        return UQModel(constant=rate)
    model = fit_super_learner(
        Dataset(d.features, w),
        library=cfg.regression_library,
        n_folds=cfg.n_folds,
        seed=derive_seed(cfg.seed, 17),
        mode="full",
        loss=LOGLOSS,
    )
    return UQModel(model=model)


def estimate_confidence(model: UQModel, x) -> float:
    """Estimated probability that the selection at ``x`` is correct."""
    return model.confidence(x)


def uq_report(labels: CorrectnessLabels, confidence: float | None = None) -> dict:
    report = {
        "n_splits": int(labels.split_accuracy.size),
        "split_accuracy": [float(a) for a in labels.split_accuracy],
        "mean_correct": labels.mean,
        "confidence": confidence,
    }
    return report


def uq_report_json(labels: CorrectnessLabels, confidence: float | None = None) -> str:
    return json.dumps(uq_report(labels, confidence), indent=2, sort_keys=True)
