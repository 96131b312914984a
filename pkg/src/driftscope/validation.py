"""Input validation helpers shared by estimators and metric functions."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError

from .errors import DegenerateDataError, InputError, NumericError, ShapeError


def as_vector(x, name: str = "x", dtype=np.float64, allow_empty: bool = False) -> np.ndarray:
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise InputError(f"{name} must not be empty")
    return arr


def as_matrix(x, name: str = "X") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be two-dimensional, got shape {arr.shape}")
    return arr


def check_finite(arr: np.ndarray, name: str = "input") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


def check_same_length(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    if len(a) != len(b):
        raise ShapeError(f"{what} have mismatched lengths: {len(a)} vs {len(b)}")


def check_binary_labels(y, name: str = "labels") -> np.ndarray:
    arr = np.asarray(y)
    uniq = np.unique(arr)
    if not np.isin(uniq, (0, 1)).all():
        raise InputError(f"{name} must be 0/1, got values {uniq[:5]}")
    if uniq.size < 2:
        raise DegenerateDataError(f"{name} contain a single class")
    return arr.astype(np.float64)


def check_n_features(X: np.ndarray, expected: int, name: str = "X") -> None:
    if X.shape[1] != expected:
        raise ShapeError(f"{name} has {X.shape[1]} columns, model expects {expected}")


def check_fitted(estimator, attribute: str) -> None:
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit() first"
        )
