"""Exact-greedy regression trees on gradient/hessian statistics.

Shared by the boosted ensemble and the random forest. Split search scans
every sorted unique value of every candidate column; ties in gain are
broken by lowest column index, then lowest threshold, so trees are
identical across platforms and runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Tree:
    """Flat-array binary tree; ``feature < 0`` marks a leaf."""

    feature: np.ndarray  # int32
    threshold: np.ndarray  # float64, nan at leaves
    left: np.ndarray  # int32, -1 at leaves
    right: np.ndarray  # int32
    value: np.ndarray  # float64 leaf values, 0 at internal nodes

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def used_columns(self) -> np.ndarray:
        return np.unique(self.feature[self.feature >= 0])

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Vectorized leaf-value lookup for a row-major float matrix."""
        node = np.zeros(X.shape[0], dtype=np.int32)
        feat = self.feature
        while True:
            f = feat[node]
            active = f >= 0
            if not active.any():
                break
            rows = np.nonzero(active)[0]
            nd = node[rows]
            go_left = X[rows, feat[nd]] <= self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
        return self.value[node]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [None if np.isnan(t) else float(t) for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "Tree":
        thr = np.asarray(
            [np.nan if t is None else t for t in d["threshold"]], dtype=np.float64
        )
        return Tree(
            feature=np.asarray(d["feature"], dtype=np.int32),
            threshold=thr,
            left=np.asarray(d["left"], dtype=np.int32),
            right=np.asarray(d["right"], dtype=np.int32),
            value=np.asarray(d["value"], dtype=np.float64),
        )


class _TreeBuilder:
    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []

    def add(self) -> int:
        self.feature.append(-1)
        self.threshold.append(np.nan)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def finish(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            value=np.asarray(self.value, dtype=np.float64),
        )


def presort_columns(X: np.ndarray) -> list:
    """Stable per-column sort orders, computed once per fit."""
    return [np.argsort(X[:, j], kind="stable") for j in range(X.shape[1])]


def _best_split(X, g, h, order, member, columns, lam, min_leaf):
    """Return (gain, column, threshold) of the best split or None."""
    best = None
    for j in columns:
        idx = order[j]
        idx = idx[member[idx]]
        n = idx.size
        if n < 2 * min_leaf:
            break  # same n for every column
        v = X[idx, j]
        gc = np.cumsum(g[idx])
        hc = np.cumsum(h[idx])
        g_tot, h_tot = gc[-1], hc[-1]
        parent = g_tot * g_tot / (h_tot + lam)
        # candidate i splits after position i (left has i+1 rows)
        pos = np.arange(n - 1)
        ok = (v[:-1] < v[1:]) & (pos + 1 >= min_leaf) & (n - pos - 1 >= min_leaf)
        if not ok.any():
            continue
        thr = 0.5 * (v[:-1] + v[1:])
        # guard against midpoints rounding onto a boundary value
        ok &= (thr > v[:-1]) & (thr < v[1:])
        if not ok.any():
            continue
        gl, hl = gc[:-1], hc[:-1]
        gr, hr = g_tot - gl, h_tot - hl
        gain = np.where(
            ok, gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent, -np.inf
        )
        k = int(np.argmax(gain))
        if gain[k] > 1e-12 and (best is None or gain[k] > best[0]):
            best = (float(gain[k]), int(j), float(thr[k]))
    return best


def grow_tree(X, g, h, rows, max_depth, min_leaf, lam,
              order=None, column_sampler=None) -> Tree:
    """Grow a tree minimizing the second-order objective on (g, h).

    Leaf values are -sum(g)/(sum(h) + lam). ``column_sampler``, when given,
    is called per node with the column count and returns the candidate
    column indices (used by the random forest).
    """
    if order is None:
        order = presort_columns(X)
    n_cols = X.shape[1]
    member = np.zeros(X.shape[0], dtype=bool)
    member[rows] = True

    builder = _TreeBuilder()
    root = builder.add()
    stack = [(root, member, 0)]
    while stack:
        node, node_member, depth = stack.pop()
        idx = np.nonzero(node_member)[0]
        g_sum = float(g[idx].sum())
        h_sum = float(h[idx].sum())
        split = None
        if depth < max_depth and idx.size >= 2 * min_leaf:
            if column_sampler is None:
                columns = range(n_cols)
            else:
                columns = column_sampler(n_cols)
            split = _best_split(X, g, h, order, node_member, columns, lam, min_leaf)
        if split is None:
            builder.value[node] = -g_sum / (h_sum + lam)
            continue
        _, j, thr = split
        builder.feature[node] = j
        builder.threshold[node] = thr
        go_left = node_member & (X[:, j] <= thr)
        left = builder.add()
        right = builder.add()
        builder.left[node] = left
        builder.right[node] = right
        # push right first so left pops first: stable node numbering
        stack.append((right, node_member & ~go_left, depth + 1))
        stack.append((left, go_left, depth + 1))
    return builder.finish()
