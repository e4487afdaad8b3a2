"""Sparse channel estimators.

Each estimator follows the scikit-learn protocol: hyperparameters in
``__init__``, ``fit(X, y)`` with the measurement matrix ``X`` (a
:class:`~sdsimat.linalg.PartialDftMatrix` or :class:`MeasurementSystem`) and
the pilot observations ``y``, learned taps in ``coef_`` and ``predict(X)``
returning ``X @ coef_``.  The module-level functions (:func:`sds_imat`,
:func:`imat`, :func:`omp`, ...) wrap them for the observation/config style
used by the simulation harness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .channel import SparseChannel
from .exceptions import (
    DimensionError,
    DivergenceError,
    InsufficientPilotsError,
    InvalidConfigError,
    SingularSupportError,
)
from .linalg import PartialDftMatrix, build_partial_dft, pseudo_inverse
from .pilots import PilotPattern
from .validation import check_complex_vector, check_fit_inputs, check_partial_dft

__all__ = [
    "MeasurementSystem",
    "SmoothingWindow",
    "RecoveryConfig",
    "RecoveryResult",
    "SdsImat",
    "Imat",
    "OrthogonalMatchingPursuit",
    "PilotInterpolation",
    "OracleLeastSquares",
    "sds_imat",
    "imat",
    "omp",
    "interpolate_estimate",
    "oracle_estimate",
    "threshold_schedule",
    "default_relaxation",
    "hard_threshold",
    "METHODS",
]

_STOP_RESIDUAL = 1e-12
_DIVERGENCE_FACTOR = 1e3
_MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class MeasurementSystem:
    """Pilot pattern together with its DFT submatrix and closed-form pseudo-inverse."""

    pattern: PilotPattern
    n_cols: int
    matrix: PartialDftMatrix
    pinv: np.ndarray

    @classmethod
    def build(cls, pattern: PilotPattern, n_cols: int) -> "MeasurementSystem":
        m = build_partial_dft(pattern.n_total, pattern, n_cols)
        return cls(pattern, int(n_cols), m, pseudo_inverse(m))

    @property
    def n_total(self) -> int:
        return self.pattern.n_total

    @property
    def n_pilots(self) -> int:
        return self.pattern.n_pilots


@dataclass(frozen=True)
class SmoothingWindow:
    """Circular smoothing kernel over tap indices.

    ``kind`` is ``"identity"``, ``"triangular"`` or ``"gaussian"``. Weights are
    normalized to unit sum. ``sigma`` only applies to the Gaussian window and
    defaults to ``half_width / 2``.
    """

    kind: str = "gaussian"
    half_width: int = 1
    sigma: Optional[float] = 0.4

    def __post_init__(self):
        if self.kind not in ("identity", "triangular", "gaussian"):
            raise InvalidConfigError(f"unknown smoothing window {self.kind!r}")
        if self.half_width < 0:
            raise InvalidConfigError("half_width must be >= 0")

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity" or self.half_width == 0

    def weights(self) -> np.ndarray:
        """Weights for offsets ``-half_width..half_width``."""
        if self.is_identity:
            return np.ones(1)
        m = np.arange(-self.half_width, self.half_width + 1)
        if self.kind == "triangular":
            w = (self.half_width + 1 - np.abs(m)).astype(float)
        else:
            sigma = self.sigma if self.sigma is not None else self.half_width / 2
            w = np.exp(-0.5 * (m / sigma) ** 2)
        return w / w.sum()

    def matrix(self, length: int) -> np.ndarray:
        """Circulant ``length x length`` matrix of the circular convolution."""
        out = np.zeros((length, length))
        eye = np.eye(length)
        for offset, weight in zip(range(-self.half_width, self.half_width + 1), self.weights()):
            out += weight * np.roll(eye, offset, axis=0)
        return out

    def __call__(self, v: np.ndarray) -> np.ndarray:
        if self.is_identity:
            return v
        return self.matrix(v.size) @ v


def _coerce_window(window) -> SmoothingWindow:
    if window is None:
        return SmoothingWindow("identity", 0)
    if isinstance(window, SmoothingWindow):
        return window
    if isinstance(window, str):
        return SmoothingWindow(window) if window != "identity" else SmoothingWindow("identity", 0)
    return SmoothingWindow(**dict(window))


@dataclass(frozen=True)
class RecoveryConfig:
    """Estimator settings shared by all methods.

    ``relaxation`` of ``None`` uses ``N / ||W||_2^2``, i.e. a residue step of
    ``W^H / ||W||_2^2``. ``threshold_scale`` of
    ``None`` uses the peak magnitude of the first residue. The threshold never
    drops below ``noise_floor`` standard deviations of the back-projected
    observation noise.
    """

    relaxation: Optional[float] = None
    threshold_scale: Optional[float] = None
    threshold_decay: float = 0.05
    max_iterations: int = 200
    smoothing: SmoothingWindow = field(default_factory=SmoothingWindow)
    smoothing_target: str = "residue"
    noise_floor: float = 2.0
    sparsity_hint: int = 4
    omp_residual_tol: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "smoothing", _coerce_window(self.smoothing))
        if self.relaxation is not None and self.relaxation <= 0:
            raise InvalidConfigError("relaxation must be > 0")
        if self.threshold_decay <= 0:
            raise InvalidConfigError("threshold_decay must be > 0")
        if self.max_iterations < 1:
            raise InvalidConfigError("max_iterations must be >= 1")
        if self.smoothing_target not in ("residue", "update"):
            raise InvalidConfigError("smoothing_target must be 'residue' or 'update'")
        if self.noise_floor < 0:
            raise InvalidConfigError("noise_floor must be >= 0")
        if self.sparsity_hint < 1:
            raise InvalidConfigError("sparsity_hint must be >= 1")

    def with_identity_window(self) -> "RecoveryConfig":
        return replace(self, smoothing=SmoothingWindow("identity", 0))


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    estimate: SparseChannel
    iterations_used: int
    residual_norm: float
    method: str


def default_relaxation(m: PartialDftMatrix) -> float:
    """``N / ||W||_2^2``: the largest step that keeps the unthresholded
    iteration a contraction up to a factor of two."""
    return m.n_total / float(np.linalg.norm(m.rows, 2)) ** 2


def threshold_schedule(scale: float, decay: float, iterations: int) -> np.ndarray:
    """``scale * exp(-decay * k)`` for ``k = 1..iterations``."""
    return scale * np.exp(-decay * np.arange(1, iterations + 1))


def hard_threshold(v: np.ndarray, level: float) -> np.ndarray:
    """Zero every entry with ``|v| <= level``."""
    return np.where(np.abs(v) > level, v, 0)


class _SparseEstimator(BaseEstimator):
    method = ""

    def predict(self, X):
        check_is_fitted(self, "coef_")
        W = X.matrix if hasattr(X, "matrix") else X
        return np.asarray(W) @ self.coef_

    def _finish(self, W, y, coef, n_iter):
        self.coef_ = coef
        self.support_ = np.flatnonzero(coef)
        self.n_iter_ = n_iter
        self.residual_norm_ = float(np.linalg.norm(y - W @ coef))
        return self

    def to_result(self) -> RecoveryResult:
        check_is_fitted(self, "coef_")
        return RecoveryResult(
            SparseChannel(self.coef_.size, tuple(self.support_), self.coef_[self.support_]),
            self.n_iter_,
            self.residual_norm_,
            self.method,
        )


class Imat(_SparseEstimator):
    """Iterative method with adaptive thresholding.

    Each iteration back-projects the observation residual through the scaled
    adjoint, adds the current estimate, and keeps the entries above an
    exponentially decaying threshold. ``smoothing`` optionally convolves the
    back-projected residue with a window first (see :class:`SdsImat`).

    Parameters
    ----------
    relaxation : float or None
        Step multiplier on ``W^H / N``. ``None`` means ``N / ||W||_2^2``.
    threshold_scale : float or None
        Initial threshold. ``None`` means the peak magnitude of the first residue.
    threshold_decay : float
        Exponential decay rate of the threshold per iteration.
    max_iterations : int
    noise_floor : float
        Lower limit for the threshold in units of the back-projected noise
        standard deviation; only active when ``fit`` is given ``noise_variance``.
    smoothing : SmoothingWindow, str or None
    smoothing_target : {"residue", "update"}
        Smooth only the residue, or the full non-sparse update.
    """

    method = "imat"

    def __init__(
        self,
        relaxation=None,
        threshold_scale=None,
        threshold_decay=0.05,
        max_iterations=200,
        noise_floor=2.0,
        smoothing=None,
        smoothing_target="residue",
    ):
        self.relaxation = relaxation
        self.threshold_scale = threshold_scale
        self.threshold_decay = threshold_decay
        self.max_iterations = max_iterations
        self.noise_floor = noise_floor
        self.smoothing = smoothing
        self.smoothing_target = smoothing_target

    def fit(self, X, y, noise_variance=0.0):
        m = check_partial_dft(X)
        W, y = check_fit_inputs(m, y)
        window = _coerce_window(self.smoothing)
        if self.threshold_decay <= 0 or self.max_iterations < 1:
            raise InvalidConfigError("threshold_decay must be > 0 and max_iterations >= 1")
        relaxation = self.relaxation if self.relaxation is not None else default_relaxation(m)
        if relaxation <= 0:
            raise InvalidConfigError("relaxation must be > 0")
        step = relaxation * pseudo_inverse(m)
        floor = self.noise_floor * relaxation / m.n_total * math.sqrt(m.n_rows * noise_variance)

        # residue = step @ (y - W h) = b - G h
        b = step @ y
        G = step @ W
        smooth = None if window.is_identity else window.matrix(m.n_cols)
        if smooth is not None and self.smoothing_target == "residue":
            b, G = smooth @ b, smooth @ G

        h = np.zeros(m.n_cols, dtype=complex)
        initial = float(np.linalg.norm(y))
        scale = self.threshold_scale
        if scale is None:
            scale = float(np.max(np.abs(step @ y)))
        n_iter = 0
        for k in range(1, self.max_iterations + 1):
            resid_norm = float(np.linalg.norm(y - W @ h))
            if resid_norm < _STOP_RESIDUAL:
                break
            if resid_norm > _DIVERGENCE_FACTOR * initial:
                raise DivergenceError(f"residual grew to {resid_norm:.3g} (initial {initial:.3g}) at iteration {k}")
            n_iter = k
            update = b - G @ h + h
            if smooth is not None and self.smoothing_target == "update":
                update = smooth @ update
            level = max(scale * math.exp(-self.threshold_decay * k), floor)
            h = hard_threshold(update, level)
        n_iter = max(n_iter, 1)
        return self._finish(W, y, h, n_iter)


class SdsImat(Imat):
    """IMAT with sparsity-domain smoothing of the back-projected residue.

    Identical to :class:`Imat` except that the residue is circularly convolved
    with ``smoothing`` before it is added to the previous estimate and
    thresholded. The default window is a three-tap Gaussian (sigma 0.4 taps).
    """

    method = "sds_imat"

    def __init__(
        self,
        relaxation=None,
        threshold_scale=None,
        threshold_decay=0.05,
        max_iterations=200,
        noise_floor=2.0,
        smoothing=SmoothingWindow(),
        smoothing_target="residue",
    ):
        super().__init__(
            relaxation=relaxation,
            threshold_scale=threshold_scale,
            threshold_decay=threshold_decay,
            max_iterations=max_iterations,
            noise_floor=noise_floor,
            smoothing=smoothing,
            smoothing_target=smoothing_target,
        )


class OrthogonalMatchingPursuit(_SparseEstimator):
    """Greedy support selection with a least-squares refit after each pick.

    Stops after ``n_nonzero_coefs`` picks, or earlier once the residual norm
    drops to ``tol`` when ``tol`` is set.
    """

    method = "omp"

    def __init__(self, n_nonzero_coefs=4, tol=None):
        self.n_nonzero_coefs = n_nonzero_coefs
        self.tol = tol

    def fit(self, X, y):
        W, y = check_fit_inputs(X, y)
        n_rows, n_cols = W.shape
        k = int(self.n_nonzero_coefs)
        if k > n_rows:
            raise DimensionError(f"cannot select {k} atoms from {n_rows} measurements")
        if k > n_cols:
            raise DimensionError(f"cannot select {k} atoms from {n_cols} columns")
        norms = np.linalg.norm(W, axis=0)
        norms[norms == 0] = 1.0
        support = []
        gains = np.zeros(0, dtype=complex)
        resid = y.copy()
        available = np.ones(n_cols, dtype=bool)
        n_iter = 0
        for _ in range(k):
            if self.tol is not None and np.linalg.norm(resid) <= self.tol:
                break
            corr = np.abs(W.conj().T @ resid) / norms
            corr[~available] = -np.inf
            pick = int(np.argmax(corr))
            support.append(pick)
            available[pick] = False
            gains = np.linalg.lstsq(W[:, support], y, rcond=None)[0]
            resid = y - W[:, support] @ gains
            n_iter += 1
        coef = np.zeros(n_cols, dtype=complex)
        coef[support] = gains
        return self._finish(W, y, coef, max(n_iter, 1))


class PilotInterpolation(BaseEstimator):
    """Linear interpolation of the pilot CFR across all subcarriers, then an
    inverse DFT truncated to the first ``n_cols`` taps.

    Interpolation is periodic in subcarrier index, so the bins after the last
    pilot are bridged to the first pilot of the next period.
    """

    method = "interpolate"

    def fit(self, X, y):
        m = check_partial_dft(X)
        W, y = check_fit_inputs(m, y)
        if m.n_rows < 2:
            raise InsufficientPilotsError("interpolation needs at least two pilots")
        idx = np.asarray(m.indices)
        order = np.argsort(idx)
        bins = np.arange(m.n_total)
        cfr = np.interp(bins, idx[order], y[order], period=m.n_total)
        taps = np.fft.ifft(cfr)[: m.n_cols]
        self.cfr_ = cfr
        self.coef_ = taps
        self.support_ = np.flatnonzero(taps)
        self.n_iter_ = 1
        self.residual_norm_ = float(np.linalg.norm(y - W @ taps))
        return self

    predict = _SparseEstimator.predict
    to_result = _SparseEstimator.to_result


class OracleLeastSquares(_SparseEstimator):
    """Least squares restricted to a known support (the "exact" benchmark)."""

    method = "oracle"

    def __init__(self, support=()):
        self.support = support

    def fit(self, X, y):
        W, y = check_fit_inputs(X, y)
        support = sorted(int(s) for s in self.support)
        if len(support) > W.shape[0]:
            raise DimensionError(f"support of size {len(support)} exceeds {W.shape[0]} measurements")
        coef = np.zeros(W.shape[1], dtype=complex)
        if support:
            A = W[:, support]
            gram = A.conj().T @ A
            if np.linalg.cond(gram) > _MAX_CONDITION:
                raise SingularSupportError("restricted Gram matrix is singular")
            coef[support] = np.linalg.solve(gram, A.conj().T @ y)
        return self._finish(W, y, coef, 1)


def _check_obs(obs, sys: MeasurementSystem) -> np.ndarray:
    if obs.pattern.indices != sys.pattern.indices or obs.pattern.n_total != sys.n_total:
        raise DimensionError("observation pattern does not match the measurement system")
    return check_complex_vector(obs.values, "observation", length=sys.n_pilots)


def _imat_estimator(cls, cfg: RecoveryConfig):
    return cls(
        relaxation=cfg.relaxation,
        threshold_scale=cfg.threshold_scale,
        threshold_decay=cfg.threshold_decay,
        max_iterations=cfg.max_iterations,
        noise_floor=cfg.noise_floor,
        smoothing=cfg.smoothing,
        smoothing_target=cfg.smoothing_target,
    )


def sds_imat(obs, sys: MeasurementSystem, cfg: RecoveryConfig = RecoveryConfig()) -> RecoveryResult:
    y = _check_obs(obs, sys)
    est = _imat_estimator(SdsImat, cfg).fit(sys, y, noise_variance=obs.noise_variance)
    return est.to_result()


def imat(obs, sys: MeasurementSystem, cfg: RecoveryConfig = RecoveryConfig()) -> RecoveryResult:
    y = _check_obs(obs, sys)
    est = _imat_estimator(Imat, cfg.with_identity_window()).fit(sys, y, noise_variance=obs.noise_variance)
    return est.to_result()


def omp(obs, sys: MeasurementSystem, cfg: RecoveryConfig = RecoveryConfig()) -> RecoveryResult:
    y = _check_obs(obs, sys)
    est = OrthogonalMatchingPursuit(cfg.sparsity_hint, cfg.omp_residual_tol).fit(sys, y)
    return est.to_result()


def interpolate_estimate(obs, sys: MeasurementSystem, cfg=None) -> RecoveryResult:
    y = _check_obs(obs, sys)
    return PilotInterpolation().fit(sys, y).to_result()


def oracle_estimate(obs, sys: MeasurementSystem, true_support) -> RecoveryResult:
    y = _check_obs(obs, sys)
    return OracleLeastSquares(tuple(true_support)).fit(sys, y).to_result()


METHODS = {
    "sds_imat": sds_imat,
    "imat": imat,
    "omp": omp,
    "interpolate": interpolate_estimate,
    "oracle": oracle_estimate,
}
