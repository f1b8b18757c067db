"""Base-classifier library with a common train/score interface."""

from .base import (
    DEFAULT_LIBRARY,
    Dataset,
    DegenerateDataError,
    FeatureScaler,
    LearnerSpec,
    NonConvergenceError,
    apply_scaler,
    fit_scaler,
    predict_score,
    train,
)
from .forest import ForestClassifier
from .knn import KnnClassifier
from .logistic import LogisticClassifier
from .svm import SvmClassifier

__all__ = [
    "DEFAULT_LIBRARY",
    "Dataset",
    "DegenerateDataError",
    "FeatureScaler",
    "ForestClassifier",
    "KnnClassifier",
    "LearnerSpec",
    "LogisticClassifier",
    "NonConvergenceError",
    "SvmClassifier",
    "apply_scaler",
    "fit_scaler",
    "predict_score",
    "train",
]
