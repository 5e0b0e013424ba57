from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photostep.errors import InputError, ParameterError
from photostep.preprocess import DerivStream, FilterParams, derivative, ema, low_pass
from photostep.signal import CHANNELS, LT

from conftest import make_ms

finite = st.floats(-100, 100, allow_nan=False)


def ema_oracle(v, alpha):
    out = [v[0]]
    for x in v[1:]:
        out.append(alpha * out[-1] + (1 - alpha) * x)
    return np.array(out)


class TestLowPass:
    def test_alpha_zero_is_identity(self):
        v = np.array([1.0, 5.0, -2.0, 3.0])
        np.testing.assert_array_equal(low_pass(make_ms(v), 0.0)[LT], v)

    def test_alpha_one_holds_first_value(self):
        v = np.array([1.0, 5.0, -2.0, 3.0])
        np.testing.assert_array_equal(low_pass(make_ms(v), 1.0)[LT], np.ones(4))

    def test_half_step(self):
        # V[0] = 2, v[1] = 4 -> 3
        np.testing.assert_allclose(ema([2.0, 4.0], 0.5), [2.0, 3.0])

    @given(st.lists(finite, min_size=1, max_size=60), st.floats(0, 1))
    def test_matches_recurrence(self, v, alpha):
        np.testing.assert_allclose(ema(v, alpha), ema_oracle(v, alpha), rtol=1e-9, atol=1e-9)

    @given(st.lists(finite, min_size=1, max_size=60), st.floats(0, 1))
    def test_convex_combination(self, v, alpha):
        out = ema(v, alpha)
        v = np.array(v)
        lo = np.minimum.accumulate(v)
        hi = np.maximum.accumulate(v)
        assert np.all(out >= lo - 1e-9) and np.all(out <= hi + 1e-9)

    def test_attenuates_high_frequencies(self):
        t = np.arange(2800) / 28.0

        def gain(f):
            out = ema(np.sin(2 * np.pi * f * t), 0.9)[500:]
            return np.ptp(out) / 2

        assert gain(10.0) < gain(1.0)

    def test_invalid_alpha(self):
        for a in (-0.1, 1.1):
            with pytest.raises(ParameterError):
                low_pass(make_ms([1.0, 2.0]), a)
            with pytest.raises(ParameterError):
                FilterParams(alpha=a)
        with pytest.raises(ParameterError):
            FilterParams(dt=0)

    def test_grid_unchanged(self):
        ms = make_ms(np.arange(10.0))
        out = low_pass(ms, 0.5)
        np.testing.assert_array_equal(out.t, ms.t)


class TestDerivative:
    def test_constant_is_zero(self):
        d = derivative(make_ms(np.full(10, 3.3)))
        for c in CHANNELS:
            np.testing.assert_array_equal(d[c], 0.0)

    def test_two_points(self):
        d = derivative(make_ms([0.0, 1.0], rate=2.0))
        np.testing.assert_allclose(d[LT], [2.0])
        assert isinstance(d, DerivStream) and d.units == "V/s"

    @given(st.floats(-10, 10), st.floats(1, 100), st.integers(2, 50))
    def test_ramp(self, c, rate, n):
        t = np.arange(n) / rate
        d = derivative(make_ms(c * t, rate=rate))
        np.testing.assert_allclose(d[LT], c, rtol=1e-9, atol=1e-9)
        assert len(d) == n - 1
        np.testing.assert_array_equal(d.t, t[1:])

    @given(st.lists(finite, min_size=2, max_size=40), st.floats(-50, 50))
    def test_offset_invariance(self, v, off):
        a = derivative(make_ms(np.array(v)))[LT]
        b = derivative(make_ms(np.array(v) + off))[LT]
        np.testing.assert_allclose(a, b, atol=1e-9 * 28 * 200)

    def test_single_point(self):
        with pytest.raises(InputError):
            derivative(make_ms([1.0]))
