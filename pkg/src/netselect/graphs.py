"""Forward simulation of random graphs with triadic-closure mechanisms.

The generator grows a simple undirected graph on a fixed node set until a
fixed number of edges has been placed.  At every step a pair of unconnected
nodes is drawn uniformly at random and connected with probability

    min(1, p0 + p1 * [t_c >= 1] + p2 * max(t_c - 1, 0)),

where ``t_c`` is the number of common neighbors of the pair at proposal time
(the triangles the new edge would close).  With ``p1 = p2 = 0`` every
proposal is accepted with the same probability ``p0``, so the generated
graphs are uniform over all graphs with the given node and edge counts, the
fixed-edge-count flavor of the Erdos-Renyi model.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .rng import MASK64, _next_below, _next_double, derive_seed

DEFAULT_PROPOSAL_CAP = 10**9


class InvalidParamsError(ValueError):
    """Model parameters violate their constraints."""


class NonTerminatingError(RuntimeError):
    """The requested generation cannot finish (acceptance probability 0)."""


class IterationCapExceededError(RuntimeError):
    """Generation gave up after too many proposals."""


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the mechanistic model.

    Parameters
    ----------
    n_nodes : int
        Number of nodes, at least 2.
    n_edges : int
        Number of edges to place, between 1 and ``C(n_nodes, 2)``.
    p0 : float
        Base acceptance probability for a proposed edge, in [0, 1].
    p1 : float
        Probability increment when the edge closes at least one triangle.
    p2 : float
        Further increment per closeable triangle beyond the first.
    """

    n_nodes: int
    n_edges: int
    p0: float
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        if self.n_nodes < 2:
            raise InvalidParamsError(f"n_nodes must be >= 2, got {self.n_nodes}")
        max_edges = self.n_nodes * (self.n_nodes - 1) // 2
        if not 1 <= self.n_edges <= max_edges:
            raise InvalidParamsError(
                f"n_edges must be in [1, {max_edges}] for n_nodes={self.n_nodes}, "
                f"got {self.n_edges}"
            )
        if not 0.0 <= self.p0 <= 1.0:
            raise InvalidParamsError(f"p0 must be in [0, 1], got {self.p0}")
        if self.p1 < 0.0 or self.p2 < 0.0:
            raise InvalidParamsError("p1 and p2 must be nonnegative")

    def without_extra_closure(self) -> "ModelParams":
        """The nested submodel: same parameters with ``p2 = 0``."""
        return ModelParams(self.n_nodes, self.n_edges, self.p0, self.p1, 0.0)


@dataclass(frozen=True)
class EdgeProposal:
    """An accepted proposal recorded during a traced generation run."""

    pair: tuple[int, int]
    closeable_triangles: int
    acceptance_probability: float


class Graph:
    """Simple undirected graph on the fixed node set ``0 .. n_nodes - 1``.

    Edges live in a canonical ``(n_edges, 2)`` array with ``u < v`` per row,
    rows sorted lexicographically; per-node neighbor sets are built lazily
    for the set-style queries.  Instances are treated as immutable once
    constructed and are safe to share read-only across threads.
    """

    __slots__ = ("n_nodes", "_earr", "_edgeset", "_adj")

    def __init__(self, n_nodes: int, edges=()):
        if n_nodes < 1:
            raise ValueError(f"n_nodes must be positive, got {n_nodes}")
        edge_set = set()
        for u, v in edges:
            u = int(u)
            v = int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise ValueError(f"edge ({u}, {v}) out of range for {n_nodes} nodes")
            pair = (u, v) if u < v else (v, u)
            if pair in edge_set:
                raise ValueError(f"duplicate edge {pair}")
            edge_set.add(pair)
        self.n_nodes = n_nodes
        if edge_set:
            self._earr = np.array(sorted(edge_set), dtype=np.int64)
        else:
            self._earr = np.empty((0, 2), dtype=np.int64)
        self._edgeset = frozenset(edge_set)
        self._adj = None

    @classmethod
    def _from_sorted_pairs(cls, n_nodes: int, eu: np.ndarray, ev: np.ndarray) -> "Graph":
        # trusted fast path for generator output (u < v per row, no dups)
        g = object.__new__(cls)
        g.n_nodes = n_nodes
        earr = np.empty((eu.shape[0], 2), dtype=np.int64)
        earr[:, 0] = eu
        earr[:, 1] = ev
        g._earr = earr[np.lexsort((ev, eu))]
        g._edgeset = None
        g._adj = None
        return g

    @property
    def edges(self) -> frozenset:
        if self._edgeset is None:
            self._edgeset = frozenset(map(tuple, self._earr.tolist()))
        return self._edgeset

    @property
    def n_edges(self) -> int:
        return self._earr.shape[0]

    def _adjacency(self) -> list:
        if self._adj is None:
            adj = [set() for _ in range(self.n_nodes)]
            for u, v in self._earr.tolist():
                adj[u].add(v)
                adj[v].add(u)
            self._adj = adj
        return self._adj

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adjacency()[u]

    def neighbors(self, v: int) -> set:
        """Neighbor set of ``v`` (a live view; do not mutate)."""
        return self._adjacency()[v]

    def degree(self, v: int) -> int:
        return len(self._adjacency()[v])

    def degrees(self) -> np.ndarray:
        return np.bincount(self._earr.ravel(), minlength=self.n_nodes).astype(
            np.int64
        )

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(n_edges, 2)`` array, rows sorted lexicographically."""
        return self._earr.copy()

    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix."""
        adj = np.zeros((self.n_nodes, self.n_nodes), dtype=np.bool_)
        e = self._earr
        adj[e[:, 0], e[:, 1]] = True
        adj[e[:, 1], e[:, 0]] = True
        return adj

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n_nodes == other.n_nodes and np.array_equal(
            self._earr, other._earr
        )

    def __hash__(self):
        return hash((self.n_nodes, self._earr.tobytes()))

    def __repr__(self):
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


def edge_probability(params: ModelParams, t_c: int) -> float:
    """Acceptance probability for a proposed edge closing ``t_c`` triangles.

    The first closeable triangle contributes ``p1``, every further one
    contributes ``p2``; the sum is capped at 1.
    """
    if t_c < 0:
        raise ValueError(f"t_c must be nonnegative, got {t_c}")
    p = params.p0
    if t_c >= 1:
        p = p + params.p1
    if t_c > 1:
        p = p + params.p2 * (t_c - 1)
    return min(1.0, p)


def count_closeable_triangles(g: Graph, u: int, v: int) -> int:
    """Number of triangles the edge ``(u, v)`` would close, ``|N(u) & N(v)|``."""
    if u == v:
        raise ValueError(f"u and v must differ, got {u}")
    if g.has_edge(u, v):
        raise ValueError(f"edge ({u}, {v}) already present")
    a, b = g.neighbors(u), g.neighbors(v)
    if len(a) > len(b):
        a, b = b, a
    return sum(1 for w in a if w in b)


@njit(cache=True)
def _generate_edges(n, m, p0, p1, p2, seed, cap):
    adj = np.zeros((n, n), dtype=np.bool_)
    eu = np.empty(m, dtype=np.int64)
    ev = np.empty(m, dtype=np.int64)
    etc = np.empty(m, dtype=np.int64)
    eprob = np.empty(m, dtype=np.float64)
    state = np.empty(1, dtype=np.uint64)
    state[0] = np.uint64(seed)
    un = np.uint64(n)
    un1 = np.uint64(n - 1)
    added = 0
    proposals = 0
    while added < m:
        if proposals >= cap:
            return 1, added, eu, ev, etc, eprob
        proposals += 1
        u = np.int64(_next_below(state, un))
        v = np.int64(_next_below(state, un1))
        if v >= u:
            v = v + np.int64(1)
        if adj[u, v]:
            # already connected: re-propose; no acceptance variate consumed
            continue
        tc = 0
        for w in range(n):
            if adj[u, w] and adj[v, w]:
                tc += 1
        acc = p0
        if tc >= 1:
            acc = acc + p1
        if tc > 1:
            acc = acc + p2 * (tc - 1)
        if acc > 1.0:
            acc = 1.0
        if _next_double(state) < acc:
            adj[u, v] = True
            adj[v, u] = True
            if u < v:
                eu[added] = u
                ev[added] = v
            else:
                eu[added] = v
                ev[added] = u
            etc[added] = tc
            eprob[added] = acc
            added += 1
    return 0, added, eu, ev, etc, eprob


def _run_generation(params: ModelParams, seed: int, proposal_cap: int):
    if params.p0 == 0.0:
        # the empty starting graph has t_c = 0 for every pair, so no edge can
        # ever be accepted
        raise NonTerminatingError(
            "p0 = 0: every proposal from the empty graph has acceptance "
            "probability 0"
        )
    status, added, eu, ev, etc, eprob = _generate_edges(
        params.n_nodes,
        params.n_edges,
        float(params.p0),
        float(params.p1),
        float(params.p2),
        np.uint64(seed & MASK64),
        int(proposal_cap),
    )
    if status == 1:
        raise IterationCapExceededError(
            f"exceeded {proposal_cap} proposals with {added} of "
            f"{params.n_edges} edges placed"
        )
    return eu, ev, etc, eprob


def generate(
    params: ModelParams, seed: int, *, proposal_cap: int = DEFAULT_PROPOSAL_CAP
) -> Graph:
    """Generate one graph; deterministic given ``(params, seed)``.

    Raises
    ------
    NonTerminatingError
        If ``p0 = 0`` (no proposal from the empty graph can be accepted).
    IterationCapExceededError
        If more than ``proposal_cap`` proposals are made.
    """
    eu, ev, _, _ = _run_generation(params, seed, proposal_cap)
    return Graph._from_sorted_pairs(params.n_nodes, eu, ev)


def generate_with_trace(
    params: ModelParams, seed: int, *, proposal_cap: int = DEFAULT_PROPOSAL_CAP
) -> tuple[Graph, list[EdgeProposal]]:
    """Like :func:`generate` but also return the accepted proposals in order.

    The trace records, for each accepted edge, the pair, the closeable
    triangle count at proposal time and the acceptance probability used.
    Tracing consumes the same random stream, so the returned graph equals
    ``generate(params, seed)``.
    """
    eu, ev, etc, eprob = _run_generation(params, seed, proposal_cap)
    trace = [
        EdgeProposal((int(u), int(v)), int(t), float(p))
        for u, v, t, p in zip(eu, ev, etc, eprob)
    ]
    return Graph._from_sorted_pairs(params.n_nodes, eu, ev), trace


def generate_batch(
    params: ModelParams,
    seed: int,
    count: int,
    *,
    proposal_cap: int = DEFAULT_PROPOSAL_CAP,
) -> list[Graph]:
    """Generate ``count`` independent graphs.

    Sample ``i`` uses the derived seed ``derive_seed(seed, i)``, so any
    contiguous or scattered subset of the batch can be reproduced in
    isolation and in any order.
    """
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    graphs = []
    for i in range(count):
        try:
            graphs.append(
                generate(params, derive_seed(seed, i), proposal_cap=proposal_cap)
            )
        except (NonTerminatingError, IterationCapExceededError) as exc:
            raise type(exc)(f"sample {i}: {exc}") from exc
    return graphs


def write_edge_list(g: Graph, path) -> None:
    """Write ``g`` in the plain text edge-list format.

    First line is ``"n_nodes n_edges"``; each following line is one
    ``"u v"`` pair with ``u < v``, 0-indexed, sorted lexicographically.
    """
    lines = [f"{g.n_nodes} {g.n_edges}\n"]
    lines.extend(f"{u} {v}\n" for u, v in g.edge_array().tolist())
    if isinstance(path, io.TextIOBase):
        path.write("".join(lines))
    else:
        with open(path, "w") as fh:
            fh.write("".join(lines))


def read_edge_list(path) -> Graph:
    """Read a graph written by :func:`write_edge_list`.

    Raises ``ValueError`` on malformed input (bad header, wrong edge count,
    self-loops, duplicates, out-of-range nodes).
    """
    if isinstance(path, io.TextIOBase):
        text = path.read()
    else:
        with open(path) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty edge-list file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"malformed header line: {lines[0]!r}")
    try:
        n_nodes, n_edges = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ValueError(f"malformed header line: {lines[0]!r}") from exc
    pairs = []
    for ln in lines[1:]:
        tokens = ln.split()
        if len(tokens) != 2:
            raise ValueError(f"malformed edge line: {ln!r}")
        try:
            pairs.append((int(tokens[0]), int(tokens[1])))
        except ValueError as exc:
            raise ValueError(f"malformed edge line: {ln!r}") from exc
    if len(pairs) != n_edges:
        raise ValueError(f"header promises {n_edges} edges, found {len(pairs)}")
    return Graph(n_nodes, pairs)


def expected_proposals(params: ModelParams) -> float:
    """Rough expected proposal count, ``n_edges / p0``; a planning aid only."""
    return math.inf if params.p0 == 0 else params.n_edges / params.p0
