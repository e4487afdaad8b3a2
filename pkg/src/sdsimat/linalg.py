"""Partial DFT measurement matrices and the few linear-algebra helpers the
estimators need."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, InvalidPatternError

__all__ = [
    "PartialDftMatrix",
    "build_partial_dft",
    "pseudo_inverse",
    "apply",
    "gram_deviation",
]


@dataclass(frozen=True, eq=False)
class PartialDftMatrix:
    """Rows of the N-point DFT matrix at the pilot bins, first ``n_cols`` columns.

    Entry ``(p, l)`` is ``exp(-2j*pi*indices[p]*l / n_total)``.
    """

    n_total: int
    indices: tuple
    n_cols: int
    rows: np.ndarray

    @property
    def n_rows(self) -> int:
        return len(self.indices)

    @property
    def shape(self):
        return self.rows.shape

    def __array__(self, dtype=None, copy=None):
        return self.rows if dtype is None else self.rows.astype(dtype)


def build_partial_dft(n_total, pattern, n_cols) -> PartialDftMatrix:
    """Build the ``len(pattern) x n_cols`` DFT submatrix for pilot bins ``pattern``.

    ``pattern`` may be a :class:`~sdsimat.pilots.PilotPattern` or any sequence of
    integer subcarrier indices.
    """
    n_total = int(n_total)
    n_cols = int(n_cols)
    if n_total < 1 or n_cols < 1:
        raise DimensionError(f"n_total and n_cols must be positive, got {n_total}, {n_cols}")
    if n_cols > n_total:
        raise DimensionError(f"n_cols={n_cols} exceeds n_total={n_total}")
    idx = np.asarray(getattr(pattern, "indices", pattern), dtype=np.int64).ravel()
    if idx.size == 0:
        raise InvalidPatternError("pilot pattern is empty")
    if idx.min() < 0 or idx.max() >= n_total:
        raise InvalidPatternError(f"pilot indices must lie in [0, {n_total})")
    # reduce the exponent modulo N before scaling so large N keeps full precision
    phase = np.outer(idx, np.arange(n_cols)) % n_total
    rows = np.exp(-2j * np.pi * phase / n_total)
    rows.setflags(write=False)
    return PartialDftMatrix(n_total, tuple(int(i) for i in idx), n_cols, rows)


def pseudo_inverse(m: PartialDftMatrix) -> np.ndarray:
    """Closed-form right inverse ``W^H / N``.

    Exact (``W @ pinv == I``) only when the row Gram matrix equals ``N * I``,
    which for a DFT submatrix holds when ``n_cols == n_total``; use
    :func:`gram_deviation` to check applicability.
    """
    out = m.rows.conj().T / m.n_total
    out.setflags(write=False)
    return out


def gram_deviation(m: PartialDftMatrix) -> float:
    """Largest elementwise deviation of ``W W^H`` from ``N * I``."""
    gram = m.rows @ m.rows.conj().T
    return float(np.max(np.abs(gram - m.n_total * np.eye(m.n_rows))))


def apply(m, v) -> np.ndarray:
    """Matrix-vector product with a shape check."""
    mat = np.asarray(m)
    vec = np.asarray(v)
    if mat.ndim != 2 or vec.ndim != 1 or mat.shape[1] != vec.shape[0]:
        raise DimensionError(f"cannot apply matrix of shape {mat.shape} to vector of shape {vec.shape}")
    return mat @ vec
