"""K-sparse Rayleigh multipath channels."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, InvalidConfigError

__all__ = ["SparseChannel", "ChannelConfig", "draw_channel", "frequency_response"]


@dataclass(frozen=True, eq=False)
class SparseChannel:
    """Length-``length`` impulse response with nonzero gains only on ``support``."""

    length: int
    support: tuple
    gains: np.ndarray

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        gains = np.asarray(self.gains, dtype=complex).ravel()
        if len(set(support)) != len(support):
            raise ValueError("support indices must be distinct")
        if len(support) != gains.size:
            raise ValueError("support and gains differ in length")
        if support and (min(support) < 0 or max(support) >= self.length):
            raise ValueError(f"support must lie in [0, {self.length})")
        order = np.argsort(support, kind="stable")
        gains = gains[order]
        gains.setflags(write=False)
        object.__setattr__(self, "support", tuple(support[i] for i in order))
        object.__setattr__(self, "gains", gains)

    @property
    def sparsity(self) -> int:
        return len(self.support)

    @property
    def as_vector(self) -> np.ndarray:
        h = np.zeros(self.length, dtype=complex)
        h[list(self.support)] = self.gains
        return h

    @classmethod
    def from_vector(cls, h, tol=0.0):
        """Wrap a dense tap vector; entries with ``|h| <= tol`` are dropped."""
        h = np.asarray(h, dtype=complex).ravel()
        support = np.flatnonzero(np.abs(h) > tol)
        return cls(h.size, tuple(support), h[support])

    @classmethod
    def zeros(cls, length):
        return cls(length, (), np.zeros(0, dtype=complex))


@dataclass(frozen=True)
class ChannelConfig:
    """Channel draw settings.

    Gains are circular complex Gaussian with variance ``1/sparsity`` so the
    expected channel energy is one. ``doppler_hz`` is informational only;
    every draw is independent.
    """

    length: int = 32
    sparsity: int = 4
    seed: int = 0
    doppler_hz: float = field(default=50.0, compare=False)

    def __post_init__(self):
        if self.length < 1:
            raise InvalidConfigError("channel length must be >= 1")
        if not 1 <= self.sparsity <= self.length:
            raise InvalidConfigError(f"need 1 <= sparsity <= length, got K={self.sparsity}, L={self.length}")


def draw_channel(cfg: ChannelConfig, rng: np.random.Generator) -> SparseChannel:
    support = rng.choice(cfg.length, size=cfg.sparsity, replace=False)
    scale = np.sqrt(0.5 / cfg.sparsity)
    gains = scale * (rng.standard_normal(cfg.sparsity) + 1j * rng.standard_normal(cfg.sparsity))
    return SparseChannel(cfg.length, tuple(support), gains)


def frequency_response(h, n_total: int) -> np.ndarray:
    """N-point DFT of the zero-padded impulse response."""
    vec = h.as_vector if isinstance(h, SparseChannel) else np.asarray(h, dtype=complex)
    if vec.size > n_total:
        raise DimensionError(f"channel length {vec.size} exceeds n_total={n_total}")
    return np.fft.fft(vec, n=n_total)
