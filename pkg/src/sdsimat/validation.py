"""Input checks shared by the estimators.

scikit-learn's ``check_array`` refuses complex input, so the estimators use
these instead.
"""
from __future__ import annotations

import numpy as np

from .exceptions import DimensionError
from .linalg import PartialDftMatrix


def check_complex_vector(v, name="y", length=None) -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr = arr.astype(complex, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    if length is not None and arr.size != length:
        raise DimensionError(f"{name} has length {arr.size}, expected {length}")
    return arr


def check_matrix(X) -> np.ndarray:
    """Return the dense measurement matrix behind ``X``."""
    if hasattr(X, "matrix"):
        X = X.matrix
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise DimensionError(f"measurement matrix must be 2-D, got shape {arr.shape}")
    arr = arr.astype(complex, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError("measurement matrix contains NaN or Inf")
    return arr


def check_partial_dft(X) -> PartialDftMatrix:
    """Return the :class:`PartialDftMatrix` behind ``X`` or raise ``TypeError``."""
    if hasattr(X, "matrix"):
        X = X.matrix
    if not isinstance(X, PartialDftMatrix):
        raise TypeError(
            "this estimator needs the pilot positions; pass a PartialDftMatrix "
            f"or MeasurementSystem, not {type(X).__name__}"
        )
    return X


def check_fit_inputs(X, y):
    W = check_matrix(X)
    y = check_complex_vector(y, "y", length=W.shape[0])
    return W, y
