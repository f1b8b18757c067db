"""Plain logistic regression fitted by iteratively reweighted least squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .base import Dataset, FeatureScaler, LearnerSpec

_MAX_ITER = 100
_TOL = 1e-10
_RIDGE = 1e-10  # keeps the Hessian invertible on separable data


@dataclass(frozen=True)
class LogisticClassifier:
    """Logistic regression with intercept on standardized features."""

    spec: LearnerSpec
    scaler: FeatureScaler
    coef: np.ndarray  # intercept first

    @classmethod
    def fit(cls, spec: LearnerSpec, d: Dataset) -> "LogisticClassifier":
        scaler = FeatureScaler.fit(d.features)
        X = np.column_stack(
            [np.ones(d.n_samples), scaler.transform(d.features)]
        )
        y = d.labels.astype(np.float64)
        beta = np.zeros(X.shape[1])
        for _ in range(_MAX_ITER):
            prob = expit(X @ beta)
            weight = np.clip(prob * (1.0 - prob), 1e-12, None)
            hess = (X * weight[:, None]).T @ X + _RIDGE * np.eye(X.shape[1])
            grad = X.T @ (y - prob)
            step = np.linalg.solve(hess, grad)
            beta = beta + step
            if np.abs(step).max() < _TOL:
                break
        return cls(spec=spec, scaler=scaler, coef=beta)

    def scores(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.coef.size - 1:
            raise ValueError(
                f"expected (n, {self.coef.size - 1}) features, got {x.shape}"
            )
        xs = np.column_stack([np.ones(x.shape[0]), self.scaler.transform(x)])
        return expit(xs @ self.coef)
