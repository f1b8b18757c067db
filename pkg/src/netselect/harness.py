"""Scenario-grid experiments and single-network model selection.

A grid cell is one (edge count, p2) combination.  For each cell the harness
simulates balanced training data from the full model and its p2 = 0
submodel, then estimates out-of-sample AUC for the full ensemble, the
discrete ensemble and each base learner with nested cross-validation: an
outer stratified split for performance measurement, and the ensemble's own
inner folds refit from scratch inside every outer fold.
"""

from __future__ import annotations

import json
import struct
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .ensemble import auc, assign_folds, fit_super_learner
from .graphs import Graph, ModelParams, generate_batch, read_edge_list
from .learners import DEFAULT_LIBRARY, Dataset
from .rng import derive_seed
from .summaries import summarize, summarize_many
from .uq import UQModel

METHOD_ORDER = ("fSL", "dSL", "SVM", "RF", "KNN")
RESULTS_HEADER = "edge_count,p2,method,auc"


@dataclass(frozen=True)
class ScenarioConfig:
    """Simulation grid settings; the constructor default is full scale."""

    n_nodes: int = 100
    p0: float = 0.3
    p1: float = 0.1
    p2_values: tuple = (0.005, 0.01, 0.03, 0.05)
    edge_counts: tuple = (500, 1000, 2000)
    samples_per_model: int = 10_000
    sl_folds: int = 5
    perf_folds: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.p0 <= 1.0:
            raise ValueError(f"p0 must be in (0, 1], got {self.p0}")
        if self.p1 < 0 or any(p2 < 0 for p2 in self.p2_values):
            raise ValueError("p1 and p2 values must be nonnegative")

    def validate_for_grid(self):
        """Nested performance CV needs enough samples per model."""
        if self.samples_per_model < 10 * self.perf_folds:
            raise ValueError(
                f"samples_per_model={self.samples_per_model} too small for "
                f"{self.perf_folds} performance folds"
            )

    @classmethod
    def desk(cls, **overrides) -> "ScenarioConfig":
        """Reduced scale for runs that should take minutes, not hours."""
        overrides.setdefault("samples_per_model", 2_000)
        return cls(**overrides)

    @classmethod
    def full(cls, **overrides) -> "ScenarioConfig":
        return cls(**overrides)

    def replace(self, **overrides) -> "ScenarioConfig":
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "p0": self.p0,
            "p1": self.p1,
            "p2_values": list(self.p2_values),
            "edge_counts": list(self.edge_counts),
            "samples_per_model": self.samples_per_model,
            "sl_folds": self.sl_folds,
            "perf_folds": self.perf_folds,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        kwargs = dict(data)
        for key in ("p2_values", "edge_counts"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def _float_bits(x: float) -> int:
    return int.from_bytes(struct.pack("<d", float(x)), "little")


def cell_seed(master_seed: int, edge_count: int, p2: float) -> int:
    """Per-cell seed derived from the master seed and the cell coordinates."""
    return derive_seed(master_seed, edge_count, _float_bits(p2))


def build_training_data(
    cfg: ScenarioConfig, edge_count: int, p2: float, seed: int | None = None
) -> Dataset:
    """Simulate one cell's training data: equal samples from both models.

    Submodel (p2 = 0) rows carry label 0 and sit at even positions, full
    model rows carry label 1 at odd positions; the interleaving is fixed so
    persisted datasets are reproducible.
    """
    if seed is None:
        seed = cell_seed(cfg.seed, edge_count, p2)
    full = ModelParams(cfg.n_nodes, edge_count, cfg.p0, cfg.p1, p2)
    sub = full.without_extra_closure()
    m = cfg.samples_per_model
    sub_rows = summarize_many(generate_batch(sub, derive_seed(seed, 0), m))
    full_rows = summarize_many(generate_batch(full, derive_seed(seed, 1), m))
    features = np.empty((2 * m, sub_rows.shape[1]), dtype=np.float64)
    features[0::2] = sub_rows
    features[1::2] = full_rows
    labels = np.empty(2 * m, dtype=np.int64)
    labels[0::2] = 0
    labels[1::2] = 1
    return Dataset(features, labels)


def performance_cv_auc(
    d: Dataset,
    library=DEFAULT_LIBRARY,
    n_folds: int = 5,
    perf_folds: int = 10,
    seed: int = 0,
) -> dict:
    """Nested-CV AUC of the full ensemble, discrete ensemble and learners.

    The outer stratified split measures performance; inside each outer fold
    a fresh ensemble (inner ``n_folds`` cross-validation, weight fit,
    refits) is trained on the remaining folds and scores the held-out fold.
    Per-fold AUCs are averaged per method.
    """
    library = tuple(library)
    outer = assign_folds(d.labels, perf_folds, derive_seed(seed, 0))
    names = _method_names(library)
    fold_aucs = {name: [] for name in names}
    for v in range(perf_folds):
        test_rows = outer.fold_rows[v]
        model = fit_super_learner(
            d.subset(outer.fold_of != v),
            library=library,
            n_folds=n_folds,
            seed=derive_seed(seed, 1, v),
            mode="full",
        )
        cand = model.learner_scores(d.features[test_rows])
        test_y = d.labels[test_rows]
        fold_aucs["fSL"].append(auc(cand @ model.weights, test_y))
        fold_aucs["dSL"].append(auc(cand[:, model.selected_index], test_y))
        for l, name in enumerate(names[2:]):
            fold_aucs[name].append(auc(cand[:, l], test_y))
    return {name: float(np.mean(fold_aucs[name])) for name in names}


def _method_names(library) -> tuple:
    names = ["fSL", "dSL"]
    for l, spec in enumerate(library):
        name = spec.name
        if name in names:
            name = f"{name}_{l}"
        names.append(name)
    return tuple(names)


@dataclass(frozen=True)
class CellResult:
    edge_count: int
    p2: float
    seed: int
    aucs: dict | None
    error: str | None = None


@dataclass(frozen=True)
class ResultsTable:
    """Per-cell AUC estimates for every method, plus the config that made them."""

    config: ScenarioConfig
    cells: tuple

    def cell(self, edge_count: int, p2: float) -> CellResult:
        for c in self.cells:
            if c.edge_count == edge_count and c.p2 == p2:
                return c
        raise KeyError(f"no cell ({edge_count}, {p2})")

    def to_csv_text(self) -> str:
        lines = [RESULTS_HEADER + "\n"]
        for c in self.cells:
            if c.aucs is None:
                continue
            for method in _ordered_methods(c.aucs):
                lines.append(
                    f"{c.edge_count},{repr(float(c.p2))},{method},"
                    f"{repr(float(c.aucs[method]))}\n"
                )
        return "".join(lines)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv_text())

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cells": [
                {
                    "edge_count": c.edge_count,
                    "p2": c.p2,
                    "seed": c.seed,
                    "aucs": c.aucs,
                    "error": c.error,
                }
                for c in self.cells
            ],
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _ordered_methods(aucs: dict) -> list:
    ordered = [m for m in METHOD_ORDER if m in aucs]
    ordered.extend(m for m in aucs if m not in METHOD_ORDER)
    return ordered


def _run_cell(cfg: ScenarioConfig, edge_count: int, p2: float) -> CellResult:
    seed = cell_seed(cfg.seed, edge_count, p2)
    try:
        data = build_training_data(cfg, edge_count, p2, seed=seed)
        aucs = performance_cv_auc(
            data,
            n_folds=cfg.sl_folds,
            perf_folds=cfg.perf_folds,
            seed=derive_seed(seed, 2),
        )
        return CellResult(edge_count, p2, seed, aucs)
    except Exception as exc:  # cells are independent; record and continue
        return CellResult(edge_count, p2, seed, None, error=f"{type(exc).__name__}: {exc}")


def run_grid(cfg: ScenarioConfig, n_jobs: int = 1) -> ResultsTable:
    """Fill every (edge count, p2) cell; deterministic given the master seed.

    Cells are independent, carry their own derived seeds and are assembled
    in grid order, so results do not depend on ``n_jobs``.  A failing cell
    records its error and leaves the other cells untouched.
    """
    cfg.validate_for_grid()
    cells_spec = [
        (edge_count, p2)
        for edge_count in cfg.edge_counts
        for p2 in cfg.p2_values
    ]
    if n_jobs > 1 and len(cells_spec) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(
                pool.map(
                    _run_cell,
                    [cfg] * len(cells_spec),
                    [ec for ec, _ in cells_spec],
                    [p2 for _, p2 in cells_spec],
                )
            )
    else:
        results = [_run_cell(cfg, ec, p2) for ec, p2 in cells_spec]
    return ResultsTable(config=cfg, cells=tuple(results))


@dataclass(frozen=True)
class SelectionResult:
    model_index: int
    score: float
    confidence: float | None = None

    def to_dict(self) -> dict:
        return {
            "model_index": self.model_index,
            "score": self.score,
            "confidence": self.confidence,
        }


def select_for_network(
    network,
    sl_model,
    uq_model: UQModel | None = None,
    expected_nodes: int | None = None,
) -> SelectionResult:
    """Classify one network and optionally attach a confidence estimate.

    ``network`` is a :class:`Graph` or a path to an edge-list file.
    Out-of-support inputs (empty graph, unexpected node count) emit a
    warning but are still classified; the training data never constrains
    what a user may feed in, so a best-effort answer beats a hard error.
    """
    g = network if isinstance(network, Graph) else read_edge_list(network)
    if g.n_edges == 0:
        warnings.warn(
            "network has no edges; outside the support of the calibrated "
            "models, classification is best-effort",
            stacklevel=2,
        )
    if expected_nodes is not None and g.n_nodes != expected_nodes:
        warnings.warn(
            f"network has {g.n_nodes} nodes but the models were calibrated "
            f"for {expected_nodes}; classification is best-effort",
            stacklevel=2,
        )
    x = summarize(g).to_array()
    score = sl_model.predict(x)
    confidence = uq_model.confidence(x) if uq_model is not None else None
    return SelectionResult(
        model_index=int(score > sl_model.cutoff),
        score=score,
        confidence=confidence,
    )
