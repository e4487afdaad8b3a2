import numpy as np
import pytest
from scipy import integrate, special

from sdsimat.channel import ChannelConfig, SparseChannel, draw_channel, frequency_response
from sdsimat.exceptions import DimensionError, InvalidConfigError
from sdsimat.linalg import apply, build_partial_dft
from sdsimat.ofdm import (
    equalize_and_demodulate,
    extract_pilot_observation,
    make_frame,
    noise_variance_for,
    qpsk_demodulate,
    qpsk_modulate,
    transmit_receive,
)
from sdsimat.pilots import PilotPattern
from sdsimat.recovery import MeasurementSystem, oracle_estimate

from .conftest import CDS_91_10


def rayleigh_qpsk_ber(snr_db):
    """Average Q(sqrt(|H|^2 / sigma^2)) over |H|^2 ~ Exp(1), by quadrature."""
    sigma2 = 10 ** (-snr_db / 10)
    q = lambda x: 0.5 * special.erfc(np.sqrt(x / sigma2) / np.sqrt(2))
    val, _ = integrate.quad(lambda x: q(x) * np.exp(-x), 0, np.inf, limit=200)
    return val


def test_quadrature_reference_matches_closed_form():
    for snr_db in (0, 10, 30):
        g = 10 ** (snr_db / 10) / 2
        assert rayleigh_qpsk_ber(snr_db) == pytest.approx(0.5 * (1 - np.sqrt(g / (1 + g))), rel=1e-6)


def test_qpsk_gray_mapping_roundtrip():
    bits = np.array([0, 0, 0, 1, 1, 1, 1, 0], dtype=np.int8)
    sym = qpsk_modulate(bits)
    np.testing.assert_allclose(np.abs(sym), 1.0)
    np.testing.assert_allclose(sym * np.sqrt(2), [1 + 1j, 1 - 1j, -1 - 1j, -1 + 1j])
    np.testing.assert_array_equal(qpsk_demodulate(sym), bits)


def test_frame_layout(cds91, rng):
    frame = make_frame(cds91, rng)
    assert frame.n_total == 91
    np.testing.assert_array_equal(frame.symbols[list(CDS_91_10)], 1.0)
    np.testing.assert_allclose(np.abs(frame.symbols), 1.0)
    assert frame.bits.size == 2 * 81
    with pytest.raises(DimensionError):
        make_frame(cds91, bits=np.zeros(10))
    with pytest.raises(InvalidConfigError):
        make_frame(cds91, rng, pilot_value=0)


def test_noiseless_receive_is_product(cds91, rng):
    frame = make_frame(cds91, rng)
    h = draw_channel(ChannelConfig(32, 4), rng)
    rx, s2 = transmit_receive(frame, h, np.inf)
    assert s2 == 0
    np.testing.assert_array_equal(rx, frame.symbols * frequency_response(h, 91))


def test_flat_channel_passes_symbols(cds91, rng):
    frame = make_frame(cds91, rng)
    rx, _ = transmit_receive(frame, SparseChannel(32, (0,), [1.0]), np.inf)
    np.testing.assert_allclose(rx, frame.symbols, atol=1e-15)


def test_receive_deterministic(cds91):
    frame = make_frame(cds91, np.random.default_rng(0))
    h = draw_channel(ChannelConfig(32, 4), np.random.default_rng(1))
    a, _ = transmit_receive(frame, h, 10.0, np.random.default_rng(2))
    b, _ = transmit_receive(frame, h, 10.0, np.random.default_rng(2))
    assert a.tobytes() == b.tobytes()


def test_pilot_observation_noiseless(cds91, rng):
    m = build_partial_dft(91, CDS_91_10, 32)
    for _ in range(10):
        frame = make_frame(cds91, rng)
        h = draw_channel(ChannelConfig(32, 4), rng)
        rx, s2 = transmit_receive(frame, h, np.inf)
        obs = extract_pilot_observation(rx, frame, s2)
        np.testing.assert_allclose(obs.values, apply(m, h.as_vector), atol=1e-9)


def test_pilot_observation_divides_pilot_value(cds91, rng):
    frame = make_frame(cds91, rng, pilot_value=2j)
    H = rng.standard_normal(91) + 1j * rng.standard_normal(91)
    obs = extract_pilot_observation(frame.symbols * H, frame, 1.0)
    np.testing.assert_allclose(obs.values, H[list(CDS_91_10)])
    assert obs.noise_variance == pytest.approx(0.25)


def test_noise_statistics(cds91, rng):
    m = build_partial_dft(91, CDS_91_10, 32)
    snr_db = 10.0
    sigma2 = noise_variance_for(snr_db)
    resid, sig, noise = [], [], []
    for _ in range(1000):
        frame = make_frame(cds91, rng)
        h = draw_channel(ChannelConfig(32, 4), rng)
        clean = frame.symbols * frequency_response(h, 91)
        rx, _ = transmit_receive(frame, h, snr_db, rng)
        obs = extract_pilot_observation(rx, frame, sigma2)
        resid.append(obs.values - apply(m, h.as_vector))
        sig.append(clean)
        noise.append(rx - clean)
    resid = np.concatenate(resid)
    assert resid.size == 10_000
    assert np.mean(np.abs(resid) ** 2) == pytest.approx(sigma2, rel=0.05)
    measured = 10 * np.log10(np.mean(np.abs(np.concatenate(sig)) ** 2) / np.mean(np.abs(np.concatenate(noise)) ** 2))
    assert abs(measured - snr_db) < 0.2


def test_zero_forcing_perfect_csi_noiseless(cds91, rng):
    frame = make_frame(cds91, rng)
    h = draw_channel(ChannelConfig(32, 4), rng)
    rx, _ = transmit_receive(frame, h, np.inf)
    out = equalize_and_demodulate(rx, h, frame)
    np.testing.assert_array_equal(out.bits, frame.bits)
    assert out.singular_events == 0


def test_real_positive_scaling_keeps_decisions(cds91, rng):
    frame = make_frame(cds91, rng)
    h = draw_channel(ChannelConfig(32, 4), rng)
    rx, _ = transmit_receive(frame, h, np.inf)
    scaled = SparseChannel(h.length, h.support, 3.7 * h.gains)
    np.testing.assert_array_equal(equalize_and_demodulate(rx, scaled, frame).bits, frame.bits)
    # a half-turn rotation flips every decision
    flipped = SparseChannel(h.length, h.support, -h.gains)
    assert np.all(equalize_and_demodulate(rx, flipped, frame).bits != frame.bits)


def test_singular_estimate_decodes_zero_bits(cds91, rng):
    frame = make_frame(cds91, rng)
    rx, _ = transmit_receive(frame, SparseChannel(32, (0,), [1.0]), np.inf)
    out = equalize_and_demodulate(rx, SparseChannel.zeros(32), frame)
    assert out.singular_events == 81
    assert not out.bits.any()


def test_end_to_end_oracle_noiseless(cds91, rng):
    msys = MeasurementSystem.build(cds91, 32)
    for _ in range(20):
        frame = make_frame(cds91, rng)
        h = draw_channel(ChannelConfig(32, 4), rng)
        rx, s2 = transmit_receive(frame, h, np.inf)
        est = oracle_estimate(extract_pilot_observation(rx, frame, s2), msys, h.support).estimate
        assert np.count_nonzero(equalize_and_demodulate(rx, est, frame).bits != frame.bits) == 0


def test_perfect_csi_ber_matches_rayleigh_reference(cds91):
    rng = np.random.default_rng(99)
    snr_db = 30.0
    errors = bits = 0
    for _ in range(10_000):
        frame = make_frame(cds91, rng)
        h = draw_channel(ChannelConfig(32, 4), rng)
        rx, _ = transmit_receive(frame, h, snr_db, rng)
        out = equalize_and_demodulate(rx, h, frame)
        errors += np.count_nonzero(out.bits != frame.bits)
        bits += out.bits.size
    ref = rayleigh_qpsk_ber(snr_db)
    assert ref / 3 < errors / bits < 3 * ref
