"""Soft-margin RBF-kernel SVM trained by sequential minimal optimization.

The dual problem is solved with second-order working-set selection and
kernel-row caching, stopping when the maximal KKT violation drops below the
tolerance.  Class-1 scores are the logistic transform of the decision value,
which leaves the ranking of scores (and therefore any rank-based loss)
identical to the raw decision values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import expit

from .base import Dataset, FeatureScaler, LearnerSpec, NonConvergenceError

KKT_TOLERANCE = 1e-3
MAX_SMO_ITERATIONS = 10**6
_CACHE_BYTES = 512 * 1024 * 1024  # kernel-row cache budget per fit


@njit(cache=True)
def _kernel_row(Xs, sq, gamma, i, cache, slot_of, owner, clock, keep_slot):
    s = slot_of[i]
    if s >= 0:
        return s
    s = clock[0]
    if s == keep_slot:
        s = (s + 1) % cache.shape[0]
    old = owner[s]
    if old >= 0:
        slot_of[old] = -1
    n = Xs.shape[0]
    p = Xs.shape[1]
    for j in range(n):
        acc = 0.0
        for t in range(p):
            acc += Xs[i, t] * Xs[j, t]
        cache[s, j] = np.exp(-gamma * (sq[i] + sq[j] - 2.0 * acc))
    owner[s] = i
    slot_of[i] = s
    clock[0] = (s + 1) % cache.shape[0]
    return s


@njit(cache=True)
def _smo(Xs, y, C, gamma, eps, max_iter, cache, slot_of, owner):
    n = Xs.shape[0]
    p = Xs.shape[1]
    sq = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for t in range(p):
            acc += Xs[i, t] * Xs[i, t]
        sq[i] = acc
    clock = np.zeros(1, dtype=np.int64)
    alpha = np.zeros(n, dtype=np.float64)
    G = np.full(n, -1.0, dtype=np.float64)  # gradient of the dual objective
    converged = False
    it = 0
    while it < max_iter:
        # first index: the most violating element of the "up" set
        Gmax = -1e300
        i = -1
        for t in range(n):
            if y[t] > 0.0:
                if alpha[t] < C and -G[t] >= Gmax:
                    Gmax = -G[t]
                    i = t
            else:
                if alpha[t] > 0.0 and G[t] >= Gmax:
                    Gmax = G[t]
                    i = t
        if i == -1:
            converged = True
            break
        si = _kernel_row(Xs, sq, gamma, i, cache, slot_of, owner, clock, -1)
        # second index: best second-order decrease among the "low" set;
        # RBF diagonal is 1, so the curvature term is 2 - 2 K_it
        Gmax2 = -1e300
        j = -1
        obj_min = 1e300
        for t in range(n):
            if y[t] > 0.0:
                if alpha[t] > 0.0:
                    grad_diff = Gmax + G[t]
                    if G[t] >= Gmax2:
                        Gmax2 = G[t]
                    if grad_diff > 0.0:
                        quad = 2.0 - 2.0 * cache[si, t]
                        if quad <= 0.0:
                            quad = 1e-12
                        obj = -(grad_diff * grad_diff) / quad
                        if obj <= obj_min:
                            obj_min = obj
                            j = t
            else:
                if alpha[t] < C:
                    grad_diff = Gmax - G[t]
                    if -G[t] >= Gmax2:
                        Gmax2 = -G[t]
                    if grad_diff > 0.0:
                        quad = 2.0 - 2.0 * cache[si, t]
                        if quad <= 0.0:
                            quad = 1e-12
                        obj = -(grad_diff * grad_diff) / quad
                        if obj <= obj_min:
                            obj_min = obj
                            j = t
        if Gmax + Gmax2 < eps or j == -1:
            converged = True
            break
        sj = _kernel_row(Xs, sq, gamma, j, cache, slot_of, owner, clock, si)
        quad = 2.0 - 2.0 * cache[si, j]
        if quad <= 0.0:
            quad = 1e-12
        old_ai = alpha[i]
        old_aj = alpha[j]
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0.0:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0.0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = total
        dai = alpha[i] - old_ai
        daj = alpha[j] - old_aj
        yi = y[i]
        yj = y[j]
        for t in range(n):
            G[t] += y[t] * (yi * cache[si, t] * dai + yj * cache[sj, t] * daj)
        it += 1
    # bias from the KKT conditions: average y*G over free vectors, else the
    # midpoint of the feasible interval
    ub = 1e300
    lb = -1e300
    sum_free = 0.0
    n_free = 0
    for t in range(n):
        yg = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0.0:
                if yg < ub:
                    ub = yg
            else:
                if yg > lb:
                    lb = yg
        elif alpha[t] <= 0.0:
            if y[t] > 0.0:
                if yg < ub:
                    ub = yg
            else:
                if yg > lb:
                    lb = yg
        else:
            n_free += 1
            sum_free += yg
    rho = sum_free / n_free if n_free > 0 else (ub + lb) / 2.0
    return alpha, rho, (0 if converged else 1), it


@dataclass(frozen=True)
class SvmClassifier:
    """Fitted SVM: support vectors, dual coefficients and bias."""

    spec: LearnerSpec
    scaler: FeatureScaler
    support_points: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for support vectors
    rho: float
    gamma: float
    n_iterations: int

    @classmethod
    def fit(cls, spec: LearnerSpec, d: Dataset) -> "SvmClassifier":
        scaler = FeatureScaler.fit(d.features)
        Xs = np.ascontiguousarray(scaler.transform(d.features))
        y = np.where(d.labels == 1, 1.0, -1.0)
        gamma = float(
            spec.svm_gamma if spec.svm_gamma is not None else 1.0 / d.n_features
        )
        n = d.n_samples
        n_slots = min(n, max(2, _CACHE_BYTES // (8 * n)))
        cache = np.empty((n_slots, n), dtype=np.float64)
        slot_of = np.full(n, -1, dtype=np.int64)
        owner = np.full(n_slots, -1, dtype=np.int64)
        alpha, rho, status, it = _smo(
            Xs,
            y,
            float(spec.svm_cost),
            gamma,
            KKT_TOLERANCE,
            MAX_SMO_ITERATIONS,
            cache,
            slot_of,
            owner,
        )
        if status != 0:
            raise NonConvergenceError(
                f"SMO did not reach tolerance {KKT_TOLERANCE} within "
                f"{MAX_SMO_ITERATIONS} iterations"
            )
        sv = alpha > 0.0
        return cls(
            spec=spec,
            scaler=scaler,
            support_points=Xs[sv],
            dual_coef=(alpha * y)[sv],
            rho=float(rho),
            gamma=float(gamma),
            n_iterations=int(it),
        )

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        """Raw decision values; sign gives the class, magnitude the margin."""
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.support_points.shape[1]:
            raise ValueError(
                f"expected (n, {self.support_points.shape[1]}) features, "
                f"got {x.shape}"
            )
        xs = self.scaler.transform(x)
        sv = self.support_points
        d2 = (
            np.einsum("ij,ij->i", xs, xs)[:, None]
            + np.einsum("ij,ij->i", sv, sv)[None, :]
            - 2.0 * xs @ sv.T
        )
        return np.exp(-self.gamma * d2) @ self.dual_coef - self.rho

    def scores(self, features: np.ndarray) -> np.ndarray:
        return expit(self.decision_values(features))
