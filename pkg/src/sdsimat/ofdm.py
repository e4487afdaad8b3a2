"""Frequency-domain OFDM link: pilot insertion, AWGN, pilot observations,
zero-forcing equalization and Gray-mapped QPSK decisions.

The cyclic prefix is assumed long enough that the channel acts as a
per-subcarrier complex gain, so no time-domain samples are simulated.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import frequency_response
from .exceptions import DimensionError, InvalidConfigError
from .pilots import PilotPattern

__all__ = [
    "BITS_PER_SYMBOL",
    "qpsk_modulate",
    "qpsk_demodulate",
    "OfdmFrame",
    "PilotObservation",
    "Demodulated",
    "make_frame",
    "noise_variance_for",
    "transmit_receive",
    "extract_pilot_observation",
    "equalize_and_demodulate",
]

BITS_PER_SYMBOL = 2
_SINGULAR_TOL = 1e-12


def qpsk_modulate(bits) -> np.ndarray:
    """Unit-energy Gray QPSK: bit pair ``(b0, b1)`` maps to ``((1-2b0) + 1j(1-2b1)) / sqrt(2)``."""
    bits = np.asarray(bits, dtype=np.int8).reshape(-1, 2)
    return ((1 - 2 * bits[:, 0]) + 1j * (1 - 2 * bits[:, 1])) / np.sqrt(2)


def qpsk_demodulate(symbols) -> np.ndarray:
    symbols = np.asarray(symbols)
    bits = np.empty((symbols.size, 2), dtype=np.int8)
    bits[:, 0] = symbols.real < 0
    bits[:, 1] = symbols.imag < 0
    return bits.ravel()


@dataclass(frozen=True, eq=False)
class OfdmFrame:
    """One OFDM symbol in the frequency domain with pilots and QPSK data."""

    symbols: np.ndarray
    pattern: PilotPattern
    bits: np.ndarray
    pilot_value: complex = 1.0 + 0.0j

    @property
    def n_total(self) -> int:
        return self.symbols.size

    @property
    def data_mask(self) -> np.ndarray:
        mask = np.ones(self.n_total, dtype=bool)
        mask[list(self.pattern.indices)] = False
        return mask


class PilotObservation(NamedTuple):
    values: np.ndarray
    pattern: PilotPattern
    noise_variance: float


class Demodulated(NamedTuple):
    bits: np.ndarray
    singular_events: int


def make_frame(pattern: PilotPattern, rng=None, bits=None, pilot_value=1.0 + 0.0j) -> OfdmFrame:
    """Fill the non-pilot subcarriers with QPSK data.

    Either ``bits`` (length ``2 * (N - Np)``) or ``rng`` must be supplied.
    """
    if pilot_value == 0:
        raise InvalidConfigError("pilot_value must be nonzero")
    n = pattern.n_total
    n_data = n - pattern.n_pilots
    if bits is None:
        if rng is None:
            raise ValueError("supply either bits or rng")
        bits = rng.integers(0, 2, size=BITS_PER_SYMBOL * n_data, dtype=np.int8)
    bits = np.asarray(bits, dtype=np.int8).ravel()
    if bits.size != BITS_PER_SYMBOL * n_data:
        raise DimensionError(f"expected {BITS_PER_SYMBOL * n_data} bits, got {bits.size}")
    symbols = np.full(n, complex(pilot_value), dtype=complex)
    mask = np.ones(n, dtype=bool)
    mask[list(pattern.indices)] = False
    symbols[mask] = qpsk_modulate(bits)
    symbols.setflags(write=False)
    bits.setflags(write=False)
    return OfdmFrame(symbols, pattern, bits, complex(pilot_value))


def noise_variance_for(snr_db: float) -> float:
    """Per-subcarrier noise variance for unit-power symbols and channels."""
    if np.isposinf(snr_db):
        return 0.0
    return float(10.0 ** (-snr_db / 10.0))


def transmit_receive(frame: OfdmFrame, h, snr_db: float, rng=None):
    """Return ``(received, noise_variance)`` with ``received = X * H + V``.

    ``snr_db=inf`` disables the noise (and ``rng`` may then be ``None``).
    """
    H = frequency_response(h, frame.n_total)
    received = frame.symbols * H
    sigma2 = noise_variance_for(snr_db)
    if sigma2 > 0:
        if rng is None:
            raise ValueError("rng is required for finite SNR")
        noise = rng.standard_normal(frame.n_total) + 1j * rng.standard_normal(frame.n_total)
        received = received + np.sqrt(sigma2 / 2) * noise
    return received, sigma2


def extract_pilot_observation(received, frame: OfdmFrame, noise_variance: float) -> PilotObservation:
    """Pilot-bin samples divided by the pilot symbol."""
    if frame.pilot_value == 0:
        raise InvalidConfigError("pilot_value must be nonzero")
    received = np.asarray(received)
    if received.size != frame.n_total:
        raise DimensionError("received vector does not match frame size")
    values = received[list(frame.pattern.indices)] / frame.pilot_value
    return PilotObservation(values, frame.pattern, noise_variance / abs(frame.pilot_value) ** 2)


def equalize_and_demodulate(received, h_est, frame: OfdmFrame) -> Demodulated:
    """Zero-forcing on the data subcarriers followed by hard QPSK decisions.

    Subcarriers whose estimated gain is numerically zero decode to zero bits
    and are counted in ``singular_events``.
    """
    H_est = frequency_response(h_est, frame.n_total)
    mask = frame.data_mask
    H_data = H_est[mask]
    r_data = np.asarray(received)[mask]
    singular = np.abs(H_data) < _SINGULAR_TOL
    safe = np.where(singular, 1.0, H_data)
    x_hat = r_data / safe
    # decide (0, 0) on singular bins: the point in the first quadrant
    x_hat[singular] = 1.0 + 1.0j
    return Demodulated(qpsk_demodulate(x_hat), int(singular.sum()))
