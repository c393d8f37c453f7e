"""Unit and property tests for the shared numeric kernels."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onebit_mimo.numerics import (
    RngStream,
    log_sum_exp,
    m_ary_compress,
    m_ary_expand,
    m_ary_expand_all,
    q_tail,
    sample_gaussian,
    sign_quantize,
)

# Frozen oracle values, computed by quadrature of the standard normal density
# (scipy.integrate.quad of exp(-u^2/2)/sqrt(2*pi); abs error < 3e-10).
Q_QUADRATURE = {
    0.5: 0.30853753872598694,
    1.0: 0.15865525393145707,
    2.0: 0.02275013194817598,
    5.0: 2.8665157035203983e-07,
}
# Asymptotic sandwich at x=10: phi(x)/x * (1 - 1/x^2) <= Q(x) <= phi(x)/x.
Q10_LOWER = 7.617652640439356e-24
Q10_UPPER = 7.69459862670642e-24


class TestQTail:
    def test_zero_is_half(self):
        assert q_tail(0.0) == 0.5

    @pytest.mark.parametrize("x,expected", sorted(Q_QUADRATURE.items()))
    def test_matches_quadrature_oracle(self, x, expected):
        assert q_tail(x) == pytest.approx(expected, abs=1e-12)

    def test_deep_tail_respects_asymptotic_bounds(self):
        q = q_tail(10.0)
        assert Q10_LOWER <= q <= Q10_UPPER
        assert q < 1e-23

    def test_always_strictly_inside_unit_interval(self):
        for x in (-1e6, -60.0, 0.0, 60.0, 1e6):
            assert 0.0 < q_tail(x) < 1.0

    def test_monotone_decreasing(self):
        # near q -> 1 adjacent fine-grid values collide at double resolution,
        # so strictness is checked at a spacing doubles can resolve
        fine = np.linspace(-8.0, 8.0, 2001)
        assert np.all(np.diff(q_tail(fine)) <= 0)
        coarse = np.linspace(-8.0, 8.0, 161)
        assert np.all(np.diff(q_tail(coarse)) < 0)

    def test_symmetry_identity(self):
        xs = np.linspace(-8.0, 8.0, 801)
        assert np.max(np.abs(q_tail(xs) + q_tail(-xs) - 1.0)) < 1e-12

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            q_tail(np.nan)
        with pytest.raises(ValueError):
            q_tail(np.inf)

    def test_vectorized_matches_scalar(self):
        xs = np.array([-3.0, -0.5, 0.0, 1.0, 4.0])
        np.testing.assert_array_equal(q_tail(xs), [q_tail(x) for x in xs])


class TestSignQuantize:
    def test_scalars(self):
        assert sign_quantize(3.2) == 1
        assert sign_quantize(-0.001) == -1

    def test_zero_maps_to_plus_one(self):
        assert sign_quantize(0.0) == 1

    def test_elementwise(self):
        np.testing.assert_array_equal(
            sign_quantize(np.array([-1.0, 0.0, 2.0])), [-1, 1, 1]
        )

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            sign_quantize(np.nan)


class TestMAryCodec:
    def test_expand_examples(self):
        np.testing.assert_array_equal(m_ary_expand(5, 2, 3), [1, 0, 1])
        np.testing.assert_array_equal(m_ary_expand(0, 4, 2), [0, 0])
        np.testing.assert_array_equal(m_ary_expand(11, 4, 2), [3, 2])

    def test_compress_examples(self):
        assert m_ary_compress([1, 0, 1], 2) == 5
        assert m_ary_compress([0, 0], 4) == 0
        assert m_ary_compress([3, 2], 4) == 11

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            m_ary_expand(8, 2, 3)
        with pytest.raises(ValueError):
            m_ary_expand(-1, 2, 3)
        with pytest.raises(ValueError):
            m_ary_compress([2, 0], 2)

    @given(st.integers(2, 16), st.integers(1, 8), st.data())
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, base, width, data):
        if base**width > 2**16:
            width = max(1, int(16 / np.log2(base)))
        k = data.draw(st.integers(0, base**width - 1))
        assert m_ary_compress(m_ary_expand(k, base, width), base) == k

    def test_expand_all_matches_scalar(self):
        table = m_ary_expand_all(3, 4)
        for k in (0, 5, 40, 80):
            np.testing.assert_array_equal(table[k], m_ary_expand(k, 3, 4))


class TestRngStream:
    def test_replay_is_identical(self):
        a = RngStream(123, 9).gaussian(1000)
        b = RngStream(123, 9).gaussian(1000)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(123, 0).gaussian(100)
        b = RngStream(123, 1).gaussian(100)
        assert not np.array_equal(a, b)

    def test_moments(self):
        draws = sample_gaussian(RngStream(2024, 0), 10**6, 1.0)
        assert abs(draws.mean()) < 0.005
        assert abs(draws.std() - 1.0) < 0.005

    def test_empty_draw(self):
        assert sample_gaussian(RngStream(1, 0), 0).shape == (0,)

    def test_bad_std_rejected(self):
        with pytest.raises(ValueError):
            sample_gaussian(RngStream(1, 0), 10, std=0.0)

    def test_bad_key_rejected(self):
        with pytest.raises(ValueError):
            RngStream(-1, 0)
        with pytest.raises(ValueError):
            RngStream(0, -1)

    def test_integers_range(self):
        vals = RngStream(5, 5).integers(7, 1000)
        assert vals.min() >= 0 and vals.max() < 7


class TestLogSumExp:
    def test_two_zeros(self):
        assert log_sum_exp([0.0, 0.0]) == pytest.approx(np.log(2.0), abs=1e-15)

    def test_extreme_shift(self):
        assert log_sum_exp([-1000.0, -1000.0]) == pytest.approx(
            -1000.0 + np.log(2.0), abs=1e-12
        )

    def test_neg_inf_entries_drop_out(self):
        assert log_sum_exp([-np.inf, -3.0]) == -3.0

    def test_all_neg_inf(self):
        assert log_sum_exp([-np.inf, -np.inf]) == -np.inf

    def test_dominant_value_is_exact(self):
        assert log_sum_exp([0.0, -800.0]) == 0.0

    def test_rejects_nan_and_pos_inf(self):
        with pytest.raises(ValueError):
            log_sum_exp([0.0, np.nan])
        with pytest.raises(ValueError):
            log_sum_exp([0.0, np.inf])

    def test_axis_reduction(self):
        m = np.array([[0.0, 0.0], [-np.inf, -1.0]])
        np.testing.assert_allclose(
            log_sum_exp(m, axis=1), [np.log(2.0), -1.0], atol=1e-15
        )

    @given(
        st.lists(st.floats(-500, 500), min_size=1, max_size=20),
        st.floats(-700, 700),
    )
    @settings(max_examples=200, deadline=None)
    def test_shift_invariance(self, values, shift):
        v = np.array(values)
        lhs = log_sum_exp(v + shift) - shift
        assert lhs == pytest.approx(log_sum_exp(v), abs=1e-10)
