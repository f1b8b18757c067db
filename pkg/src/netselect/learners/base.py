"""Shared dataset/spec types and the train/score interface of the library.

Every base classifier exposes the same contract: ``train(spec, dataset)``
returns a fitted, immutable model whose ``scores(features)`` method maps a
2-d feature matrix to class-1 scores in [0, 1].  Scoring is deterministic
given the fitted state.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

KNN = "knn"
SVM = "svm"
RF = "rf"
LOGISTIC = "logistic"
_KINDS = (KNN, SVM, RF, LOGISTIC)


class DegenerateDataError(ValueError):
    """Training data is missing one of the two classes."""


class NonConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before converging."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus binary model-index labels.

    ``labels`` holds 0 for the nominally negative model and 1 for the
    positive one; rows of ``features`` are samples.
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError("features must be 2-d")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ValueError("labels must be 1-d and match features")
        if features.shape[0] == 0:
            raise ValueError("dataset is empty")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must contain only 0 or 1")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        return Dataset(self.features[indices], self.labels[indices])

    def class_counts(self) -> tuple[int, int]:
        ones = int(self.labels.sum())
        return self.n_samples - ones, ones


@dataclass(frozen=True)
class LearnerSpec:
    """Configuration of one library entry.

    Defaults: KNN with k = 10; random forest with 500 trees, ``mtry =
    floor(sqrt(p))`` and minimum node size 1; RBF-kernel SVM with cost 1 and
    ``gamma = 1 / p``.  ``None`` for ``rf_mtry``/``svm_gamma`` means the
    p-dependent default, resolved at fit time.
    """

    kind: str
    knn_k: int = 10
    rf_n_trees: int = 500
    rf_mtry: int | None = None
    rf_min_node: int = 1
    svm_cost: float = 1.0
    svm_gamma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if self.knn_k < 1 or self.rf_n_trees < 1 or self.rf_min_node < 1:
            raise ValueError("counts must be positive")
        if self.rf_mtry is not None and self.rf_mtry < 1:
            raise ValueError("rf_mtry must be positive")
        if self.svm_cost <= 0 or (self.svm_gamma is not None and self.svm_gamma <= 0):
            raise ValueError("svm_cost and svm_gamma must be positive")

    @classmethod
    def knn(cls, **kw) -> "LearnerSpec":
        return cls(kind=KNN, **kw)

    @classmethod
    def svm(cls, **kw) -> "LearnerSpec":
        return cls(kind=SVM, **kw)

    @classmethod
    def rf(cls, **kw) -> "LearnerSpec":
        return cls(kind=RF, **kw)

    @classmethod
    def logistic(cls, **kw) -> "LearnerSpec":
        return cls(kind=LOGISTIC, **kw)

    def with_seed(self, seed: int) -> "LearnerSpec":
        return dataclasses.replace(self, seed=seed)

    @property
    def name(self) -> str:
        return self.kind.upper() if self.kind != LOGISTIC else "logistic"


DEFAULT_LIBRARY = (LearnerSpec.knn(), LearnerSpec.svm(), LearnerSpec.rf())


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature standardization fitted on training data.

    Columns are shifted to mean 0 and divided by the standard deviation
    (1/n normalization); zero-variance columns pass through unscaled.
    """

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "FeatureScaler":
        features = np.asarray(features, dtype=np.float64)
        mean = features.mean(axis=0)
        sd = features.std(axis=0)
        scale = np.where(sd > 0.0, sd, 1.0)
        zero = sd == 0.0
        return cls(mean=np.where(zero, 0.0, mean), scale=scale)

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        return (features - self.mean) / self.scale


def fit_scaler(d: Dataset) -> FeatureScaler:
    return FeatureScaler.fit(d.features)


def apply_scaler(s: FeatureScaler, features: np.ndarray) -> np.ndarray:
    return s.transform(features)


def _require_both_classes(d: Dataset):
    n0, n1 = d.class_counts()
    if n0 == 0 or n1 == 0:
        raise DegenerateDataError(
            f"training data needs both classes, got counts (0: {n0}, 1: {n1})"
        )


def train(spec: LearnerSpec, d: Dataset):
    """Fit the classifier described by ``spec`` on ``d``."""
    _require_both_classes(d)
    from . import forest, knn, logistic, svm

    if spec.kind == KNN:
        return knn.KnnClassifier.fit(spec, d)
    if spec.kind == SVM:
        return svm.SvmClassifier.fit(spec, d)
    if spec.kind == RF:
        return forest.ForestClassifier.fit(spec, d)
    if spec.kind == LOGISTIC:
        return logistic.LogisticClassifier.fit(spec, d)
    raise ValueError(f"unknown learner kind {spec.kind!r}")


def predict_score(model, features) -> float:
    """Class-1 score of a single feature vector under a fitted model."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict_score takes a single feature vector")
    return float(model.scores(x[None, :])[0])
