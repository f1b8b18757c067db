"""Graph summary statistics used as classifier predictors.

Five statistics describe a network: the triangle count, the average local
clustering coefficient and the three quartiles of the degree distribution.
The quartiles use linear interpolation of the order statistics with plotting
position ``h = (n - 1) * q`` (the numpy/R default), and nodes of degree < 2
contribute a clustering coefficient of 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .graphs import Graph

FEATURE_NAMES = ("triangles", "avg_clustering", "deg_q25", "deg_q50", "deg_q75")
DATASET_HEADER = "model_index," + ",".join(FEATURE_NAMES)


@dataclass(frozen=True)
class SummaryVector:
    """The five predictor statistics of one network, in fixed order."""

    triangles: int
    avg_clustering: float
    deg_q25: float
    deg_q50: float
    deg_q75: float

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                float(self.triangles),
                self.avg_clustering,
                self.deg_q25,
                self.deg_q50,
                self.deg_q75,
            ],
            dtype=np.float64,
        )


@njit(cache=True)
def _triangles_and_clustering(adj):
    # returns (sum over v of e(v), sum over v of c(v)); e(v) counts edges
    # among the neighbors of v, so the triangle count is the first sum / 3
    n = adj.shape[0]
    nbrs = np.empty(n, dtype=np.int64)
    neighbor_edges = 0
    clustering_sum = 0.0
    for v in range(n):
        d = 0
        for w in range(n):
            if adj[v, w]:
                nbrs[d] = w
                d += 1
        e_v = 0
        for i in range(d):
            a = nbrs[i]
            for j in range(i + 1, d):
                if adj[a, nbrs[j]]:
                    e_v += 1
        neighbor_edges += e_v
        if d >= 2:
            clustering_sum += 2.0 * e_v / (d * (d - 1.0))
    return neighbor_edges, clustering_sum


def triangle_count(g: Graph) -> int:
    """Number of node triples with all three edges present."""
    neighbor_edges, _ = _triangles_and_clustering(g.adjacency_matrix())
    return int(neighbor_edges) // 3


def local_clustering(g: Graph, v: int) -> float:
    """Local clustering coefficient of ``v``; 0 for degree < 2.

    For degree ``d >= 2`` this is ``2 e(v) / (d (d - 1))`` where ``e(v)``
    counts edges among the neighbors of ``v``.
    """
    if not 0 <= v < g.n_nodes:
        raise ValueError(f"node {v} out of range for {g.n_nodes} nodes")
    nbrs = sorted(g.neighbors(v))
    d = len(nbrs)
    if d < 2:
        return 0.0
    e_v = 0
    for i in range(d):
        a = g.neighbors(nbrs[i])
        for j in range(i + 1, d):
            if nbrs[j] in a:
                e_v += 1
    return 2.0 * e_v / (d * (d - 1.0))


def avg_clustering(g: Graph) -> float:
    """Mean local clustering coefficient over all nodes."""
    _, clustering_sum = _triangles_and_clustering(g.adjacency_matrix())
    return float(clustering_sum) / g.n_nodes


def _linear_quantile(sorted_vals: np.ndarray, q: float) -> float:
    # order-statistic interpolation at h = (n - 1) q, numpy's default rule
    n = sorted_vals.size
    h = (n - 1) * q
    i = math.floor(h)
    if i + 1 >= n:
        return float(sorted_vals[n - 1])
    lo = float(sorted_vals[i])
    return lo + (h - i) * (float(sorted_vals[i + 1]) - lo)


def degree_quartiles(g: Graph) -> tuple[float, float, float]:
    """The 25%, 50% and 75% quantiles of the degree distribution."""
    degs = np.sort(g.degrees())
    return (
        _linear_quantile(degs, 0.25),
        _linear_quantile(degs, 0.50),
        _linear_quantile(degs, 0.75),
    )


def summarize(g: Graph) -> SummaryVector:
    """All five predictor statistics of ``g``."""
    neighbor_edges, clustering_sum = _triangles_and_clustering(g.adjacency_matrix())
    q25, q50, q75 = degree_quartiles(g)
    return SummaryVector(
        triangles=int(neighbor_edges) // 3,
        avg_clustering=float(clustering_sum) / g.n_nodes,
        deg_q25=q25,
        deg_q50=q50,
        deg_q75=q75,
    )


def summarize_many(graphs) -> np.ndarray:
    """Feature matrix with one :class:`SummaryVector` row per graph."""
    rows = np.empty((len(graphs), len(FEATURE_NAMES)), dtype=np.float64)
    for i, g in enumerate(graphs):
        rows[i] = summarize(g).to_array()
    return rows


def write_dataset_csv(path, features: np.ndarray, labels: np.ndarray) -> None:
    """Write a labeled feature matrix in the dataset CSV format.

    One header line, then one row per sample:
    ``model_index,triangles,avg_clustering,deg_q25,deg_q50,deg_q75``.
    Floats are serialized with full round-trip precision.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if features.ndim != 2 or features.shape[1] != len(FEATURE_NAMES):
        raise ValueError(f"features must be (n, {len(FEATURE_NAMES)})")
    if labels.shape[0] != features.shape[0]:
        raise ValueError("features and labels differ in length")
    lines = [DATASET_HEADER + "\n"]
    for y, row in zip(labels, features):
        tri = int(row[0])
        if tri != row[0]:
            raise ValueError(f"triangle count must be integral, got {row[0]}")
        rest = ",".join(repr(float(x)) for x in row[1:])
        lines.append(f"{int(y)},{tri},{rest}\n")
    with open(path, "w") as fh:
        fh.write("".join(lines))


def read_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a dataset CSV written by :func:`write_dataset_csv`."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines or lines[0] != DATASET_HEADER:
        raise ValueError(f"expected header {DATASET_HEADER!r}")
    n = len(lines) - 1
    features = np.empty((n, len(FEATURE_NAMES)), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    for i, ln in enumerate(lines[1:]):
        parts = ln.split(",")
        if len(parts) != len(FEATURE_NAMES) + 1:
            raise ValueError(f"malformed row: {ln!r}")
        labels[i] = int(parts[0])
        features[i] = [float(x) for x in parts[1:]]
    return features, labels
