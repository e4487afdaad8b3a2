import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdsimat.exceptions import DimensionError, InvalidPatternError
from sdsimat.linalg import apply, build_partial_dft, gram_deviation, pseudo_inverse

from .conftest import CDS_91_10, dft_entry


def test_zero_index_row_is_all_ones():
    m = build_partial_dft(4, [0], 2)
    np.testing.assert_allclose(m.rows, [[1, 1]], atol=1e-15)


def test_quarter_turn_row():
    m = build_partial_dft(4, [1], 2)
    np.testing.assert_allclose(m.rows, [[1, -1j]], atol=1e-15)


def test_entries_match_reference_kernel():
    m = build_partial_dft(91, CDS_91_10, 32)
    ref = np.array([[dft_entry(91, k, l) for l in range(32)] for k in CDS_91_10])
    np.testing.assert_allclose(m.rows, ref, atol=1e-12)
    np.testing.assert_allclose(np.abs(m.rows), 1.0, atol=1e-12)


def test_rows_are_geometric_progressions():
    m = build_partial_dft(91, CDS_91_10, 32)
    ratio = m.rows[:, 1:] / m.rows[:, :-1]
    np.testing.assert_allclose(ratio, np.repeat(m.rows[:, 1:2], 31, axis=1), atol=1e-12)


def test_gram_identity_full_span():
    # W W^H = N I holds exactly only when the tap span covers all N bins
    m = build_partial_dft(91, CDS_91_10, 91)
    gram = m.rows @ m.rows.conj().T
    np.testing.assert_allclose(gram, 91 * np.eye(10), atol=1e-9)
    assert gram_deviation(m) < 1e-9


def test_gram_identity_fails_for_short_span():
    m = build_partial_dft(91, CDS_91_10, 32)
    gram = m.rows @ m.rows.conj().T
    np.testing.assert_allclose(np.diag(gram).real, 32.0, atol=1e-9)
    assert gram_deviation(m) > 1.0


def test_pseudo_inverse_full_dft():
    m = build_partial_dft(4, [0, 1, 2, 3], 4)
    pinv = pseudo_inverse(m)
    np.testing.assert_allclose(pinv, np.conj(m.rows).T / 4, atol=1e-15)
    np.testing.assert_allclose(pinv @ m.rows, np.eye(4), atol=1e-9)
    np.testing.assert_allclose(m.rows @ pinv, np.eye(4), atol=1e-9)


def test_pseudo_inverse_cds_shape_and_corner():
    m = build_partial_dft(91, CDS_91_10, 32)
    pinv = pseudo_inverse(m)
    assert pinv.shape == (32, 10)
    assert pinv[0, 0] == pytest.approx(1 / 91, abs=1e-15)


def test_pseudo_inverse_matches_moore_penrose_when_full_span():
    m = build_partial_dft(91, CDS_91_10, 91)
    np.testing.assert_allclose(pseudo_inverse(m), np.linalg.pinv(m.rows), atol=1e-9)


def test_apply_basics():
    v = np.array([1 + 2j, -3j, 0.5])
    np.testing.assert_array_equal(apply(np.eye(3), v), v)
    np.testing.assert_array_equal(apply(np.zeros((2, 3)), v), np.zeros(2))
    m = build_partial_dft(91, CDS_91_10, 32)
    e0 = np.zeros(32)
    e0[0] = 1
    np.testing.assert_allclose(apply(m, e0), np.ones(10), atol=1e-15)


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply(np.eye(3), np.ones(4))


def test_build_errors():
    with pytest.raises(InvalidPatternError):
        build_partial_dft(8, [0, 8], 4)
    with pytest.raises(InvalidPatternError):
        build_partial_dft(8, [-1], 4)
    with pytest.raises(DimensionError):
        build_partial_dft(8, [0, 1], 9)


def test_deterministic_and_immutable():
    a = build_partial_dft(91, CDS_91_10, 32)
    b = build_partial_dft(91, CDS_91_10, 32)
    np.testing.assert_array_equal(a.rows, b.rows)
    with pytest.raises(ValueError):
        a.rows[0, 0] = 0


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(2, 40),
    data=st.data(),
)
def test_right_inverse_property_full_span(n, data):
    idx = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    m = build_partial_dft(n, idx, n)
    np.testing.assert_allclose(m.rows @ pseudo_inverse(m), np.eye(len(idx)), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_apply_is_linear(seed):
    rng = np.random.default_rng(seed)
    m = build_partial_dft(16, rng.choice(16, 5, replace=False), 8)
    u, v = (rng.standard_normal(8) + 1j * rng.standard_normal(8) for _ in range(2))
    a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    np.testing.assert_allclose(
        apply(m, a * u + b * v), a * apply(m, u) + b * apply(m, v), atol=1e-9
    )
