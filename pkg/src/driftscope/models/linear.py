"""L2-penalized logistic regression solved by Newton iterations."""

from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator

from ..errors import ConvergenceError
from ..validation import (
    as_matrix,
    check_binary_labels,
    check_fitted,
    check_n_features,
)


class LogisticModel(BaseEstimator):
    """Newton/IRLS solver for sum log-loss + (l2/2)||w||^2.

    Features are standardized internally; the intercept is unpenalized.
    Convergence requires the penalized gradient norm to fall below
    tol * n_samples; separable data with l2 = 0 therefore raises
    ConvergenceError instead of silently returning diverged weights.
    """

    def __init__(self, l2=1.0, max_iter=200, tol=1e-8):
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        X = as_matrix(X)
        y = check_binary_labels(y)
        n, d = X.shape
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        Z = np.column_stack([(X - mean) / scale, np.ones(n)])
        w = np.zeros(d + 1)
        penalty = np.full(d + 1, float(self.l2))
        penalty[-1] = 0.0  # free intercept
        limit = self.tol * n
        grad_norm = np.inf
        for _ in range(self.max_iter):
            p = expit(Z @ w)
            grad = Z.T @ (p - y) + penalty * w
            grad_norm = float(np.linalg.norm(grad))
            if grad_norm <= limit:
                break
            r = np.clip(p * (1.0 - p), 1e-12, None)
            hess = (Z * r[:, None]).T @ Z + np.diag(penalty)
            try:
                step = np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError(
                    f"singular Newton system (gradient norm {grad_norm:.3g})",
                    gradient_norm=grad_norm,
                ) from exc
            w = w - step
            if not np.all(np.isfinite(w)):
                raise ConvergenceError(
                    "weights diverged during Newton iterations",
                    gradient_norm=grad_norm,
                )
        else:
            raise ConvergenceError(
                f"no convergence in {self.max_iter} iterations "
                f"(gradient norm {grad_norm:.3g})",
                gradient_norm=grad_norm,
            )
        self.n_features_in_ = d
        self._mean = mean
        self._scale = scale
        self.std_coef_ = w[:-1].copy()
        self.coef_ = w[:-1] / scale
        self.intercept_ = float(w[-1] - np.dot(w[:-1], mean / scale))
        return self

    def predict_margin(self, X) -> np.ndarray:
        check_fitted(self, "coef_")
        X = as_matrix(X)
        check_n_features(X, self.n_features_in_)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        p = expit(self.predict_margin(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)
