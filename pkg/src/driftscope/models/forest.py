"""Bagged decision forest over the shared exact-greedy tree grower."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .._rng import child_rng
from ..validation import (
    as_matrix,
    check_binary_labels,
    check_fitted,
    check_n_features,
)
from ._trees import grow_tree, presort_columns


class RandomForest(BaseEstimator):
    """Averaged class-rate trees on bootstrap samples.

    Each tree is a variance-reduction regression tree on the 0/1 labels
    (gradient -y, unit hessian, no shrinkage), so leaves hold the class
    rate of their training rows; the forest probability is the mean leaf
    rate across trees.
    """

    def __init__(self, n_trees=100, max_depth=8, min_leaf=5,
                 bootstrap=True, feature_subsample="sqrt", seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.bootstrap = bootstrap
        self.feature_subsample = feature_subsample
        self.seed = seed

    def _sampler(self, rng):
        if self.feature_subsample is None:
            return None
        if self.feature_subsample == "sqrt":
            def sample(n_cols):
                k = max(1, int(np.sqrt(n_cols)))
                return np.sort(rng.choice(n_cols, size=k, replace=False))
            return sample
        raise ValueError(f"unknown feature_subsample: {self.feature_subsample}")

    def fit(self, X, y):
        X = as_matrix(X)
        y = check_binary_labels(y)
        n = X.shape[0]
        order = presort_columns(X)
        trees = []
        for t in range(self.n_trees):
            rng = child_rng(self.seed, "forest", t)
            if self.bootstrap:
                rows = np.sort(rng.choice(n, size=n, replace=True))
            else:
                rows = np.arange(n)
            # bootstrap duplicates enter through g/h weights
            weight = np.bincount(rows, minlength=n).astype(np.float64)
            tree = grow_tree(
                X,
                g=-y * weight,
                h=weight,
                rows=np.nonzero(weight)[0],
                max_depth=self.max_depth,
                min_leaf=self.min_leaf,
                lam=1e-12,
                order=order,
                column_sampler=self._sampler(rng),
            )
            trees.append(tree)
        self.trees_ = trees
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_fitted(self, "trees_")
        X = as_matrix(X)
        check_n_features(X, self.n_features_in_)
        p = np.zeros(X.shape[0])
        for tree in self.trees_:
            p += tree.apply(X)
        p = np.clip(p / len(self.trees_), 0.0, 1.0)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)
