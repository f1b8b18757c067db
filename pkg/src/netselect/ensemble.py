"""Super-learner ensemble on cross-validated base-learner scores.

The workflow: stratified V-fold assignment, one score column per library
entry built from out-of-fold predictions, a per-fold risk (1 - AUC for model
selection, mean negative binomial log-likelihood for probability
regression), then either the single best learner (discrete mode) or the best
convex combination of learner scores (full mode).  The weight search always
evaluates every pure single-learner weighting and the uniform blend as
candidates, so the optimized combination can never do worse on the
cross-validated scores than the best single learner.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .learners import DEFAULT_LIBRARY, Dataset, LearnerSpec, train
from .rng import MASK64, derive_seed

AUC_LOSS = "auc"
LOGLOSS = "logloss"
_LOSSES = (AUC_LOSS, LOGLOSS)
_CLAMP = 1e-6  # keeps the binomial log-likelihood finite on 0/1 scores


class SingleClassError(ValueError):
    """Scores cannot be ranked: only one class present."""


class SingleClassFoldError(SingleClassError):
    """A cross-validation fold contains a single class."""


class TooFewSamplesError(ValueError):
    """A class has fewer samples than folds."""


class CvTrainingError(RuntimeError):
    """A base learner failed during cross-validated training."""


def _midranks(x: np.ndarray) -> np.ndarray:
    # 1-based ranks, ties averaged
    order = np.argsort(x, kind="stable")
    sx = x[order]
    n = x.size
    new_group = np.empty(n, dtype=bool)
    new_group[0] = True
    new_group[1:] = sx[1:] != sx[:-1]
    gid = np.cumsum(new_group) - 1
    starts = np.flatnonzero(new_group)
    counts = np.diff(np.append(starts, n))
    group_rank = starts + 0.5 * (counts - 1) + 1.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = group_rank[gid]
    return ranks


def auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative, ties half.

    Computed from midranks (the Mann-Whitney statistic), which agrees with
    the all-pairs count exactly.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.size != labels.size:
        raise ValueError("scores and labels differ in length")
    n1 = int(np.count_nonzero(labels == 1))
    n0 = labels.size - n1
    if n0 == 0 or n1 == 0:
        raise SingleClassError("AUC needs at least one sample of each class")
    ranks = _midranks(scores)
    r1 = float(ranks[labels == 1].sum())
    return (r1 - n1 * (n1 + 1) / 2.0) / (n1 * n0)


def _log_loss(scores: np.ndarray, labels: np.ndarray) -> float:
    p = np.clip(scores, _CLAMP, 1.0 - _CLAMP)
    y = labels.astype(np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


@dataclass(frozen=True)
class FoldAssignment:
    """Stratified fold membership for each sample row."""

    n_folds: int
    fold_of: np.ndarray
    seed: int

    @cached_property
    def fold_rows(self) -> tuple:
        return tuple(
            np.flatnonzero(self.fold_of == v) for v in range(self.n_folds)
        )


def assign_folds(data, n_folds: int, seed: int) -> FoldAssignment:
    """Assign each sample to one of ``n_folds`` folds, stratified by class.

    Within each class the shuffled samples are dealt round-robin, so fold
    sizes differ by at most one per class and every fold holds both classes.
    Deterministic given ``seed``.
    """
    labels = data.labels if isinstance(data, Dataset) else np.asarray(data)
    if n_folds < 2:
        raise ValueError(f"n_folds must be at least 2, got {n_folds}")
    rng = np.random.default_rng(seed & MASK64)
    fold_of = np.empty(labels.shape[0], dtype=np.int64)
    for cls in (0, 1):
        rows = np.flatnonzero(labels == cls)
        if rows.size < n_folds:
            raise TooFewSamplesError(
                f"class {cls} has {rows.size} samples, fewer than "
                f"{n_folds} folds"
            )
        perm = rng.permutation(rows.size)
        fold_of[rows[perm]] = np.arange(rows.size) % n_folds
    return FoldAssignment(n_folds=n_folds, fold_of=fold_of, seed=seed & MASK64)


@dataclass(frozen=True)
class CrossValidatedPredictions:
    """Out-of-fold score matrix: one row per sample, one column per learner."""

    scores: np.ndarray
    labels: np.ndarray
    folds: FoldAssignment
    library: tuple


def cv_predictions(
    d: Dataset, library, folds: FoldAssignment, seed: int | None = None
) -> CrossValidatedPredictions:
    """Score every sample with learners trained on the other folds.

    Learner seeds are derived from ``(seed, fold, learner)``; ``seed``
    defaults to a stream derived from the fold seed.
    """
    library = tuple(library)
    if not library:
        raise ValueError("library must not be empty")
    if folds.fold_of.shape[0] != d.n_samples:
        raise ValueError("fold assignment does not match dataset")
    if seed is None:
        seed = derive_seed(folds.seed, 97)
    scores = np.empty((d.n_samples, len(library)), dtype=np.float64)
    for v in range(folds.n_folds):
        test_rows = folds.fold_rows[v]
        train_ds = d.subset(folds.fold_of != v)
        for l, spec in enumerate(library):
            try:
                model = train(spec.with_seed(derive_seed(seed, v, l)), train_ds)
                scores[test_rows, l] = model.scores(d.features[test_rows])
            except Exception as exc:
                raise CvTrainingError(
                    f"fold {v}, learner {l} ({spec.name}): {exc}"
                ) from exc
    return CrossValidatedPredictions(
        scores=scores, labels=d.labels.copy(), folds=folds, library=library
    )


def _check_folds_have_both_classes(z: CrossValidatedPredictions):
    for v, rows in enumerate(z.folds.fold_rows):
        ones = int(np.count_nonzero(z.labels[rows] == 1))
        if ones == 0 or ones == rows.size:
            raise SingleClassFoldError(f"fold {v} contains a single class")


def _fold_risk(comb: np.ndarray, z: CrossValidatedPredictions, loss: str) -> float:
    vals = np.empty(z.folds.n_folds, dtype=np.float64)
    for v, rows in enumerate(z.folds.fold_rows):
        if loss == AUC_LOSS:
            vals[v] = auc(comb[rows], z.labels[rows])
        else:
            vals[v] = _log_loss(comb[rows], z.labels[rows])
    if loss == AUC_LOSS:
        return 1.0 - float(vals.mean())
    return float(vals.mean())


def _weights_risk(z: CrossValidatedPredictions, weights: np.ndarray, loss: str) -> float:
    return _fold_risk(z.scores @ weights, z, loss)


def cv_risk(z: CrossValidatedPredictions, l: int, loss: str = AUC_LOSS) -> float:
    """Cross-validated risk of learner ``l``: per-fold losses averaged."""
    if loss not in _LOSSES:
        raise ValueError(f"unknown loss {loss!r}")
    if loss == AUC_LOSS:
        _check_folds_have_both_classes(z)
    return _fold_risk(z.scores[:, l], z, loss)


def cv_risks(z: CrossValidatedPredictions, loss: str = AUC_LOSS) -> np.ndarray:
    return np.array([cv_risk(z, l, loss) for l in range(len(z.library))])


def select_discrete(z: CrossValidatedPredictions, loss: str = AUC_LOSS) -> int:
    """Index of the learner with the smallest risk; ties pick the lowest."""
    return int(np.argmin(cv_risks(z, loss)))


@dataclass(frozen=True)
class EnsembleWeights:
    """Convex-combination weights over the library."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty vector")
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "weights", w)


def _softmax(theta: np.ndarray) -> np.ndarray:
    t = theta - theta.max()
    w = np.exp(t)
    return w / w.sum()


def optimize_weights(
    z: CrossValidatedPredictions, loss: str = AUC_LOSS
) -> EnsembleWeights:
    """Weights approximately minimizing the combined-score risk.

    The rank-based risk is piecewise constant, so a derivative-free simplex
    search runs over an unconstrained parameterization (softmax onto the
    simplex), restarted from each vertex and the barycenter.  Every vertex
    and the uniform blend are themselves candidates, which guarantees the
    returned risk is no worse than any single learner's risk on ``z``.
    """
    if loss not in _LOSSES:
        raise ValueError(f"unknown loss {loss!r}")
    if loss == AUC_LOSS:
        _check_folds_have_both_classes(z)
    n_learners = len(z.library)
    if n_learners == 1:
        return EnsembleWeights(np.array([1.0]))
    candidates = [
        np.eye(n_learners)[l] for l in range(n_learners)
    ]
    candidates.append(np.full(n_learners, 1.0 / n_learners))

    def objective(theta):
        return _weights_risk(z, _softmax(theta), loss)

    starts = [np.zeros(n_learners)]
    starts.extend(8.0 * np.eye(n_learners)[l] for l in range(n_learners))
    for theta0 in starts:
        res = minimize(
            objective,
            theta0,
            method="Nelder-Mead",
            options={
                "maxiter": 200 * n_learners,
                "xatol": 1e-3,
                "fatol": 1e-10,
            },
        )
        w = _softmax(res.x)
        candidates.append(w / w.sum())
    best_w = candidates[0]
    best_risk = _weights_risk(z, best_w, loss)
    for w in candidates[1:]:
        r = _weights_risk(z, w, loss)
        if r < best_risk:
            best_risk = r
            best_w = w
    return EnsembleWeights(best_w)


@dataclass(frozen=True)
class SuperLearnerModel:
    """Fitted ensemble: refit library plus the selection made on ``Z``.

    ``selected_index`` drives discrete-mode predictions, ``weights`` the
    full-mode convex combination; ``cv_risks`` are the per-learner risks the
    selection was based on.  Instances are immutable and safe to score
    concurrently.
    """

    mode: str
    loss: str
    library: tuple
    cv_risks: np.ndarray
    selected_index: int | None
    weights: np.ndarray | None
    weight_risk: float | None
    refit_learners: tuple
    cutoff: float
    n_folds: int
    seed: int

    def learner_scores(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        return np.column_stack([m.scores(x) for m in self.refit_learners])

    def scores(self, features: np.ndarray) -> np.ndarray:
        cand = self.learner_scores(features)
        if self.mode == "discrete":
            return cand[:, self.selected_index]
        return cand @ self.weights

    def predict(self, x) -> float:
        if hasattr(x, "to_array"):
            x = x.to_array()
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError("predict takes a single feature vector")
        return float(self.scores(x[None, :])[0])

    def classify(self, x) -> int:
        """1 iff the score strictly exceeds the cutoff."""
        return int(self.predict(x) > self.cutoff)

    def classify_many(self, features: np.ndarray) -> np.ndarray:
        return (self.scores(features) > self.cutoff).astype(np.int64)

    def to_report(self) -> dict:
        report = {
            "mode": self.mode,
            "loss": self.loss,
            "library": [spec.name for spec in self.library],
            "cv_risks": [float(r) for r in self.cv_risks],
            "cutoff": self.cutoff,
            "n_folds": self.n_folds,
            "seed": self.seed,
        }
        if self.mode == "discrete":
            report["selected_index"] = self.selected_index
        else:
            report["weights"] = [float(w) for w in self.weights]
            report["weight_risk"] = self.weight_risk
        return report

    def report_json(self) -> str:
        return json.dumps(self.to_report(), indent=2, sort_keys=True)


def fit_super_learner(
    d: Dataset,
    library=DEFAULT_LIBRARY,
    n_folds: int = 5,
    seed: int = 0,
    mode: str = "full",
    loss: str = AUC_LOSS,
    cutoff: float = 0.5,
) -> SuperLearnerModel:
    """Cross-validate the library on ``d`` and refit it on all of ``d``.

    In full mode the optimized weights are checked against every pure
    single-learner weighting on the internal score matrix; by construction
    they can never be worse, and a violation raises ``RuntimeError``.
    """
    if mode not in ("discrete", "full"):
        raise ValueError(f"mode must be 'discrete' or 'full', got {mode!r}")
    library = tuple(library)
    folds = assign_folds(d.labels, n_folds, derive_seed(seed, 0))
    z = cv_predictions(d, library, folds, seed=derive_seed(seed, 1))
    risks = cv_risks(z, loss)
    selected = int(np.argmin(risks))
    weights = None
    weight_risk = None
    if mode == "full":
        ew = optimize_weights(z, loss)
        weights = ew.weights
        weight_risk = _weights_risk(z, weights, loss)
        vertex_min = min(
            _weights_risk(z, np.eye(len(library))[l], loss)
            for l in range(len(library))
        )
        if weight_risk > vertex_min:
            raise RuntimeError(
                "weight optimization returned a combination worse than a "
                f"single learner ({weight_risk} > {vertex_min})"
            )
    refit = tuple(
        train(spec.with_seed(derive_seed(seed, 2, l)), d)
        for l, spec in enumerate(library)
    )
    return SuperLearnerModel(
        mode=mode,
        loss=loss,
        library=library,
        cv_risks=risks,
        selected_index=selected,
        weights=weights,
        weight_risk=weight_risk,
        refit_learners=refit,
        cutoff=cutoff,
        n_folds=n_folds,
        seed=seed,
    )


def predict(model: SuperLearnerModel, x) -> float:
    """Ensemble score of a single feature vector."""
    return model.predict(x)


def classify(model: SuperLearnerModel, x) -> int:
    """Model index chosen for ``x``: 1 iff score > cutoff."""
    return model.classify(x)
