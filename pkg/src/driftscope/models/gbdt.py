"""Gradient-boosted trees for binary log-loss, grown with exact greedy splits."""

from __future__ import annotations

import numpy as np
from scipy.special import expit, logit
from sklearn.base import BaseEstimator

from .._rng import child_rng
from ..validation import (
    as_matrix,
    check_binary_labels,
    check_fitted,
    check_n_features,
)
from ._trees import Tree, grow_tree, presort_columns


def log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


class GradientBoostedTrees(BaseEstimator):
    """Second-order boosting on logistic loss.

    Leaf values are -sum(gradient)/(sum(hessian) + l2); predictions are
    sigmoid(base_score + learning_rate * sum of tree outputs) where
    base_score is the log-odds of the training prevalence. Fitting is
    single-threaded and bit-reproducible for a given seed.
    """

    def __init__(self, n_trees=100, max_depth=3, learning_rate=0.1,
                 min_leaf=20, subsample=0.8, l2=1.0, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_leaf = min_leaf
        self.subsample = subsample
        self.l2 = l2
        self.seed = seed

    def fit(self, X, y):
        X = as_matrix(X)
        y = check_binary_labels(y)
        n = X.shape[0]
        prevalence = float(np.mean(y))
        self.base_score_ = float(logit(prevalence))
        self.n_features_in_ = X.shape[1]
        order = presort_columns(X)
        margin = np.full(n, self.base_score_)
        trees, losses = [], []
        all_rows = np.arange(n)
        for round_idx in range(self.n_trees):
            p = expit(margin)
            g = p - y
            h = p * (1.0 - p)
            if self.subsample < 1.0:
                rng = child_rng(self.seed, "gbdt-subsample", round_idx)
                m = max(1, int(self.subsample * n))
                rows = np.sort(rng.choice(n, size=m, replace=False))
            else:
                rows = all_rows
            tree = grow_tree(
                X, g, h, rows, self.max_depth, self.min_leaf, self.l2, order=order
            )
            margin = margin + self.learning_rate * tree.apply(X)
            trees.append(tree)
            losses.append(log_loss(y, expit(margin)))
        self.trees_ = trees
        self.train_logloss_ = losses
        return self

    def predict_margin(self, X) -> np.ndarray:
        check_fitted(self, "trees_")
        X = as_matrix(X)
        check_n_features(X, self.n_features_in_)
        margin = np.full(X.shape[0], self.base_score_)
        for tree in self.trees_:
            margin = margin + self.learning_rate * tree.apply(X)
        return margin

    def predict_proba(self, X) -> np.ndarray:
        p = expit(self.predict_margin(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        check_fitted(self, "trees_")
        return {
            "kind": "gbdt",
            "base_score": self.base_score_,
            "learning_rate": self.learning_rate,
            "n_features": self.n_features_in_,
            "params": {
                "n_trees": self.n_trees,
                "max_depth": self.max_depth,
                "min_leaf": self.min_leaf,
                "subsample": self.subsample,
                "l2": self.l2,
                "seed": self.seed,
            },
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GradientBoostedTrees":
        params = d.get("params", {})
        model = cls(learning_rate=d["learning_rate"], **params)
        model.base_score_ = float(d["base_score"])
        model.n_features_in_ = int(d["n_features"])
        model.trees_ = [Tree.from_dict(t) for t in d["trees"]]
        model.train_logloss_ = None
        return model
