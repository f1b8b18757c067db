"""Random forest classifier built from scratch on Gini-impurity trees.

Each tree grows on a bootstrap resample (n draws with replacement) until
nodes are pure or reach the minimum size, choosing at every node the best
midpoint split over ``mtry`` features drawn without replacement.  Ties in
impurity are broken toward the lexicographically smallest (feature index,
threshold) pair, and per-tree random streams are derived from
``(seed, tree index)``, so a fitted forest is a pure function of
``(spec, seed, data)``.

For speed, feature columns are argsorted once per fit; each bootstrap is
held as per-row multiplicities, and a tree works on the drawn rows in
presorted order with those multiplicities as weights, which is exactly the
multiset bootstrap (duplicated rows always travel together through splits).
Sorted order is maintained through splits by stable partition, so nodes
never sort and their scans run over contiguous memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .base import Dataset, LearnerSpec
from ..rng import _next_below, derive_seed


@njit(cache=True)
def _compress_bootstrap(
    X, ylab, state, presort, count, tpos, svals, sorted_pos, wt, wy
):
    # n draws with replacement -> per-row counts; drawn rows are then laid
    # out in presorted feature order with their counts as weights
    n = X.shape[0]
    p = X.shape[1]
    for r in range(n):
        count[r] = 0
    for i in range(n):
        count[np.int64(_next_below(state, np.uint64(n)))] += 1
    k = 0
    for r in range(n):
        if count[r] > 0:
            tpos[r] = k
            wt[k] = count[r]
            wy[k] = count[r] * ylab[r]
            k += 1
    for f in range(p):
        c = 0
        for s in range(n):
            r = presort[f, s]
            if count[r] > 0:
                svals[f, c] = X[r, f]
                sorted_pos[f, c] = tpos[r]
                c += 1
    return k


@njit(cache=True)
def _build_tree(
    svals,
    sorted_pos,
    wt,
    wy,
    k,
    state,
    mtry,
    min_node,
    feat,
    thr,
    left,
    right,
    vote,
    tmp_pos,
    tmp_val,
    go_left,
    stack_lo,
    stack_hi,
    stack_id,
    featbuf,
):
    p = svals.shape[0]
    stack_lo[0] = 0
    stack_hi[0] = k
    stack_id[0] = 0
    sp = 1
    n_nodes = 1
    while sp > 0:
        sp -= 1
        lo = stack_lo[sp]
        hi = stack_hi[sp]
        node = stack_id[sp]
        size = 0
        ones = 0
        for s in range(lo, hi):
            t = sorted_pos[0, s]
            size += wt[t]
            ones += wy[t]
        feat[node] = -1
        thr[node] = 0.0
        left[node] = -1
        right[node] = -1
        vote[node] = -1
        if size <= min_node or ones == 0 or ones == size:
            vote[node] = 1 if 2 * ones > size else 0
            continue
        # mtry distinct features by partial Fisher-Yates, scanned in
        # ascending feature order so equal-gain ties resolve the same way
        for t in range(p):
            featbuf[t] = t
        for t in range(mtry):
            r = t + np.int64(_next_below(state, np.uint64(p - t)))
            swap = featbuf[t]
            featbuf[t] = featbuf[r]
            featbuf[r] = swap
        for a in range(1, mtry):
            key = featbuf[a]
            b = a - 1
            while b >= 0 and featbuf[b] > key:
                featbuf[b + 1] = featbuf[b]
                b -= 1
            featbuf[b + 1] = key
        best_cost = 1e300
        best_f = -1
        best_thr = 0.0
        total1 = float(ones)
        total = float(size)
        for c in range(mtry):
            f = featbuf[c]
            cum_w = 0
            cum_wy = 0
            for s in range(lo + 1, hi):
                t_prev = sorted_pos[f, s - 1]
                cum_w += wt[t_prev]
                cum_wy += wy[t_prev]
                v_prev = svals[f, s - 1]
                v_cur = svals[f, s]
                if v_cur > v_prev:
                    nl = float(cum_w)
                    nr = total - nl
                    c1l = float(cum_wy)
                    c0l = nl - c1l
                    c1r = total1 - c1l
                    c0r = nr - c1r
                    gini_l = 1.0 - (c0l * c0l + c1l * c1l) / (nl * nl)
                    gini_r = 1.0 - (c0r * c0r + c1r * c1r) / (nr * nr)
                    cost = nl * gini_l + nr * gini_r
                    if cost < best_cost:
                        best_cost = cost
                        best_f = f
                        mid = v_prev + (v_cur - v_prev) / 2.0
                        if mid <= v_prev:
                            mid = v_cur
                        best_thr = mid
        if best_f < 0:
            # all candidate features constant on a mixed node
            vote[node] = 1 if 2 * ones > size else 0
            continue
        nl_rows = 0
        for s in range(lo, hi):
            t = sorted_pos[best_f, s]
            if svals[best_f, s] < best_thr:
                go_left[t] = 1
                nl_rows += 1
            else:
                go_left[t] = 0
        # stable partition of every feature's segment keeps them sorted
        for f in range(p):
            a = lo
            b = lo + nl_rows
            for s in range(lo, hi):
                t = sorted_pos[f, s]
                v = svals[f, s]
                if go_left[t] == 1:
                    tmp_pos[a] = t
                    tmp_val[a] = v
                    a += 1
                else:
                    tmp_pos[b] = t
                    tmp_val[b] = v
                    b += 1
            for s in range(lo, hi):
                sorted_pos[f, s] = tmp_pos[s]
                svals[f, s] = tmp_val[s]
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feat[node] = best_f
        thr[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack_lo[sp] = lo
        stack_hi[sp] = lo + nl_rows
        stack_id[sp] = lid
        sp += 1
        stack_lo[sp] = lo + nl_rows
        stack_hi[sp] = hi
        stack_id[sp] = rid
        sp += 1
    return n_nodes


@njit(cache=True)
def _forest_scores(Xq, feat, thr, left, right, vote, roots):
    nq = Xq.shape[0]
    n_trees = roots.shape[0]
    out = np.empty(nq, dtype=np.float64)
    for q in range(nq):
        votes = 0
        for t in range(n_trees):
            node = roots[t]
            while feat[node] >= 0:
                if Xq[q, feat[node]] < thr[node]:
                    node = left[node]
                else:
                    node = right[node]
            votes += vote[node]
        out[q] = votes / n_trees
    return out


@dataclass(frozen=True)
class ForestClassifier:
    """Fitted forest stored as flat node arrays with per-tree roots.

    A leaf votes the majority class of its bootstrap samples (ties vote 0);
    the score of a query is the fraction of trees voting class 1.  Splits
    consume raw features, so no scaler is involved.
    """

    spec: LearnerSpec
    feat: np.ndarray
    thr: np.ndarray
    left: np.ndarray
    right: np.ndarray
    vote: np.ndarray
    roots: np.ndarray
    n_features: int

    @classmethod
    def fit(cls, spec: LearnerSpec, d: Dataset) -> "ForestClassifier":
        n = d.n_samples
        p = d.n_features
        if spec.rf_mtry is not None and spec.rf_mtry > p:
            raise ValueError(f"rf_mtry={spec.rf_mtry} exceeds {p} features")
        mtry = spec.rf_mtry if spec.rf_mtry is not None else max(1, math.isqrt(p))
        min_node = spec.rf_min_node
        X = d.features
        ylab = d.labels
        presort = np.empty((p, n), dtype=np.int64)
        for f in range(p):
            presort[f] = np.argsort(X[:, f], kind="stable")
        cap = 2 * n + 1
        feat_buf = np.empty(cap, dtype=np.int32)
        thr_buf = np.empty(cap, dtype=np.float64)
        left_buf = np.empty(cap, dtype=np.int32)
        right_buf = np.empty(cap, dtype=np.int32)
        vote_buf = np.empty(cap, dtype=np.int32)
        count = np.empty(n, dtype=np.int64)
        tpos = np.empty(n, dtype=np.int64)
        svals = np.empty((p, n), dtype=np.float64)
        sorted_pos = np.empty((p, n), dtype=np.int64)
        wt = np.empty(n, dtype=np.int64)
        wy = np.empty(n, dtype=np.int64)
        tmp_pos = np.empty(n, dtype=np.int64)
        tmp_val = np.empty(n, dtype=np.float64)
        go_left = np.empty(n, dtype=np.uint8)
        stack_lo = np.empty(cap, dtype=np.int64)
        stack_hi = np.empty(cap, dtype=np.int64)
        stack_id = np.empty(cap, dtype=np.int64)
        featbuf = np.empty(p, dtype=np.int64)
        state = np.empty(1, dtype=np.uint64)
        pieces = []
        roots = np.empty(spec.rf_n_trees, dtype=np.int64)
        offset = 0
        for t in range(spec.rf_n_trees):
            state[0] = np.uint64(derive_seed(spec.seed, t))
            k = _compress_bootstrap(
                X, ylab, state, presort, count, tpos, svals, sorted_pos, wt, wy
            )
            used = _build_tree(
                svals,
                sorted_pos,
                wt,
                wy,
                k,
                state,
                mtry,
                min_node,
                feat_buf,
                thr_buf,
                left_buf,
                right_buf,
                vote_buf,
                tmp_pos,
                tmp_val,
                go_left,
                stack_lo,
                stack_hi,
                stack_id,
                featbuf,
            )
            fe = feat_buf[:used].copy()
            le = left_buf[:used].copy()
            ri = right_buf[:used].copy()
            internal = le >= 0
            le[internal] += offset
            ri[internal] += offset
            pieces.append((fe, thr_buf[:used].copy(), le, ri, vote_buf[:used].copy()))
            roots[t] = offset
            offset += used
        return cls(
            spec=spec,
            feat=np.concatenate([q[0] for q in pieces]),
            thr=np.concatenate([q[1] for q in pieces]),
            left=np.concatenate([q[2] for q in pieces]),
            right=np.concatenate([q[3] for q in pieces]),
            vote=np.concatenate([q[4] for q in pieces]),
            roots=roots,
            n_features=p,
        )

    def scores(self, features: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ValueError(f"expected (n, {self.n_features}) features, got {x.shape}")
        return _forest_scores(
            x, self.feat, self.thr, self.left, self.right, self.vote, self.roots
        )
