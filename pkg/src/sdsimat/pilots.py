"""Pilot placement: coherence of partial DFT matrices, cyclic difference sets,
and the random baselines they are compared against."""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import DimensionError, InvalidPatternError, InvalidTransformError

__all__ = [
    "PilotPattern",
    "CdsParams",
    "DifferenceMultiset",
    "coherence",
    "coherence_direct",
    "difference_multiset",
    "is_cds",
    "cds_family",
    "coherence_lower_bound",
    "random_pattern",
    "random_search",
    "load_base_cds",
    "BASE_CDS",
]


@dataclass(frozen=True)
class PilotPattern:
    """Distinct pilot subcarrier indices in ``[0, n_total)``, 0-based."""

    n_total: int
    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise InvalidPatternError("pilot pattern is empty")
        if len(set(idx)) != len(idx):
            raise InvalidPatternError("pilot indices must be distinct")
        if min(idx) < 0 or max(idx) >= self.n_total:
            raise InvalidPatternError(f"pilot indices must lie in [0, {self.n_total})")
        object.__setattr__(self, "indices", idx)

    @property
    def n_pilots(self) -> int:
        return len(self.indices)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)


class CdsParams(NamedTuple):
    lambda_repeats: int
    v: int
    k: int


@dataclass(frozen=True, eq=False)
class DifferenceMultiset:
    """``counts[d]`` is the number of ordered pairs ``(l, k)`` with
    ``indices[l] - indices[k] == d (mod N)``; ``counts[0]`` counts the ``l == k`` pairs."""

    counts: np.ndarray

    @property
    def n_total(self) -> int:
        return self.counts.size


def _as_pattern(pattern, n_total=None) -> PilotPattern:
    if isinstance(pattern, PilotPattern):
        return pattern
    if n_total is None:
        raise InvalidPatternError("n_total is required when pattern is a plain sequence")
    return PilotPattern(n_total, tuple(pattern))


def _exp_sums(pattern: PilotPattern, lags) -> np.ndarray:
    idx = pattern.as_array()
    phase = np.outer(np.asarray(lags, dtype=np.int64), idx) % pattern.n_total
    return np.exp(-2j * np.pi * phase / pattern.n_total).sum(axis=1)


def coherence(pattern, n_cols: int, n_total: Optional[int] = None) -> float:
    """Mutual coherence of the pilot DFT submatrix with ``n_cols`` columns.

    Uses the single-sum form: the inner product of columns ``i`` and ``j``
    depends only on ``i - j``, so only lags ``1..n_cols-1`` are scanned.
    """
    pattern = _as_pattern(pattern, n_total)
    if n_cols < 2:
        raise DimensionError("coherence needs at least two columns")
    sums = _exp_sums(pattern, np.arange(1, n_cols))
    return float(np.max(np.abs(sums)) / pattern.n_pilots)


def coherence_direct(pattern, n_cols: int, n_total: Optional[int] = None) -> float:
    """Coherence as the largest normalized inner product over all column pairs."""
    pattern = _as_pattern(pattern, n_total)
    if n_cols < 2:
        raise DimensionError("coherence needs at least two columns")
    phase = np.outer(pattern.as_array(), np.arange(n_cols)) % pattern.n_total
    w = np.exp(-2j * np.pi * phase / pattern.n_total)
    w = w / np.linalg.norm(w, axis=0)
    g = np.abs(w.conj().T @ w)
    np.fill_diagonal(g, 0.0)
    return float(g.max())


def difference_multiset(pattern, n_total: Optional[int] = None) -> DifferenceMultiset:
    pattern = _as_pattern(pattern, n_total)
    idx = pattern.as_array()
    diffs = (idx[:, None] - idx[None, :]) % pattern.n_total
    counts = np.bincount(diffs.ravel(), minlength=pattern.n_total)
    counts.setflags(write=False)
    return DifferenceMultiset(counts)


def is_cds(pattern, n_total: Optional[int] = None) -> Optional[CdsParams]:
    """Return ``(lambda, v, k)`` if every nonzero difference occurs equally often."""
    pattern = _as_pattern(pattern, n_total)
    n, k = pattern.n_total, pattern.n_pilots
    if n == 1:
        return CdsParams(1, 1, 1)
    counts = difference_multiset(pattern).counts[1:]
    if np.all(counts == counts[0]):
        return CdsParams(int(counts[0]), n, k)
    return None


def cds_family(base, shift: int, multiplier: int, n_total: Optional[int] = None) -> PilotPattern:
    """Affine image ``(multiplier * idx + shift) mod N`` of a pattern.

    Raises :class:`InvalidTransformError` unless ``multiplier`` is a unit mod N.
    When ``base`` is a difference set, so is the result (checked).
    """
    base = _as_pattern(base, n_total)
    n = base.n_total
    if math.gcd(int(multiplier), n) != 1:
        raise InvalidTransformError(f"multiplier {multiplier} is not coprime to {n}")
    idx = (int(multiplier) * base.as_array() + int(shift)) % n
    out = PilotPattern(n, tuple(idx))
    params = is_cds(base)
    if params is not None and is_cds(out) != params:
        raise InvalidTransformError("affine image lost the difference-set property")
    return out


def coherence_lower_bound(n_total: int, n_pilots: int) -> float:
    """Smallest coherence achievable by any ``n_pilots``-subset of ``n_total`` bins.

    The squared exponential sum averages ``Np (N - Np) / (N - 1)`` over the
    nonzero lags, so its maximum is at least that.
    """
    if not 1 <= n_pilots <= n_total:
        raise DimensionError(f"need 1 <= n_pilots <= n_total, got {n_pilots}, {n_total}")
    if n_total == 1:
        return 0.0
    return math.sqrt(n_pilots * (n_total - n_pilots) / (n_total - 1)) / n_pilots


def random_pattern(n_total: int, n_pilots: int, rng: np.random.Generator) -> PilotPattern:
    idx = np.sort(rng.choice(n_total, size=n_pilots, replace=False))
    return PilotPattern(n_total, tuple(idx))


def random_search(n_total, n_pilots, n_cols, iterations, rng):
    """Best of ``iterations`` independent uniform patterns, by coherence.

    Returns the winning pattern and the running-minimum trace; ties keep the
    earliest draw.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    best, best_mu = None, math.inf
    trace = np.empty(iterations)
    for i in range(iterations):
        cand = random_pattern(n_total, n_pilots, rng)
        mu = coherence(cand, n_cols)
        if mu < best_mu:
            best, best_mu = cand, mu
        trace[i] = best_mu
    return best, trace


BASE_CDS = {
    (91, 10): "cds_91_10_1.txt",
    (2257, 48): "cds_2257_48_1.txt",
}


def load_base_cds(n_total: int, n_pilots: int) -> PilotPattern:
    """Load a shipped base difference set and verify it on load."""
    try:
        fname = BASE_CDS[(n_total, n_pilots)]
    except KeyError:
        raise InvalidPatternError(
            f"no shipped difference set for N={n_total}, Np={n_pilots}; "
            f"available: {sorted(BASE_CDS)}"
        ) from None
    text = resources.files("sdsimat.data").joinpath(fname).read_text()
    pattern = PilotPattern(n_total, tuple(int(tok) for tok in text.split()))
    if is_cds(pattern) is None:
        raise InvalidPatternError(f"shipped set {fname} is not a cyclic difference set")
    return pattern
