"""k-nearest-neighbor classifier on standardized features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Dataset, FeatureScaler, LearnerSpec

_CHUNK = 1024  # query rows per distance-matrix block


@dataclass(frozen=True)
class KnnClassifier:
    """Stores the scaled training points; scoring ranks them per query.

    The score is the fraction of the k nearest neighbors (squared Euclidean
    distance on standardized features) with label 1.  Distance ties are
    broken by the lowest training-row index.
    """

    spec: LearnerSpec
    scaler: FeatureScaler
    points: np.ndarray
    labels: np.ndarray

    @classmethod
    def fit(cls, spec: LearnerSpec, d: Dataset) -> "KnnClassifier":
        if spec.knn_k > d.n_samples:
            raise ValueError(
                f"knn_k={spec.knn_k} exceeds training size {d.n_samples}"
            )
        scaler = FeatureScaler.fit(d.features)
        return cls(
            spec=spec,
            scaler=scaler,
            points=scaler.transform(d.features),
            labels=d.labels.astype(np.float64),
        )

    def scores(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.points.shape[1]:
            raise ValueError(
                f"expected (n, {self.points.shape[1]}) features, got {x.shape}"
            )
        xs = self.scaler.transform(x)
        k = self.spec.knn_k
        out = np.empty(xs.shape[0], dtype=np.float64)
        train_sq = np.einsum("ij,ij->i", self.points, self.points)
        for lo in range(0, xs.shape[0], _CHUNK):
            block = xs[lo : lo + _CHUNK]
            d2 = train_sq - 2.0 * block @ self.points.T
            d2 += np.einsum("ij,ij->i", block, block)[:, None]
            # stable sort keeps equal distances in training-row order
            order = np.argsort(d2, axis=1, kind="stable")[:, :k]
            out[lo : lo + _CHUNK] = self.labels[order].mean(axis=1)
        return out
