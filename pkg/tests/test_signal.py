from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photostep.errors import AlignmentError, InputError, ParameterError, RangeError
from photostep.signal import (
    CHANNELS,
    LS,
    LT,
    RS,
    RT,
    ChannelId,
    Foot,
    MultiStream,
    Placement,
    SampleStream,
    resample_align,
    uniform_grid,
    window,
)

from conftest import make_ms


def _piecewise(tq, ts, vs):
    """Segment-equation evaluation, independent of np.interp."""
    out = []
    for x in tq:
        for k in range(len(ts) - 1):
            if ts[k] <= x <= ts[k + 1]:
                a, b = ts[k], ts[k + 1]
                out.append(vs[k] + (vs[k + 1] - vs[k]) * (x - a) / (b - a))
                break
        else:
            raise AssertionError(f"{x} outside knots")
    return np.array(out)


class TestTypes:
    def test_channel_codes_round_trip(self):
        assert [c.code for c in CHANNELS] == ["lt", "ls", "rt", "rs"]
        for c in CHANNELS:
            assert ChannelId.from_code(c.code) == c
        assert LT == ChannelId(Foot.LEFT, Placement.TOP)

    def test_foot_opposite(self):
        assert Foot.LEFT.opposite is Foot.RIGHT and Foot.RIGHT.opposite is Foot.LEFT

    def test_stream_rejects_non_increasing(self):
        with pytest.raises(InputError):
            SampleStream(LT, [0.0, 0.0], [1.0, 2.0])
        with pytest.raises(InputError):
            SampleStream(LT, [0.0, 0.1], [1.0, np.nan])
        with pytest.raises(InputError):
            SampleStream(LT, [-0.1, 0.1], [1.0, 1.0])
        with pytest.raises(ParameterError):
            SampleStream(LT, [0.0, 0.1], [1.0, 1.0], nominal_rate=0)

    def test_stream_is_immutable(self):
        s = SampleStream(LT, [0.0, 0.1], [1.0, 2.0])
        with pytest.raises(ValueError):
            s.v[0] = 5.0
        assert s.samples[1] == (0.1, 2.0)


class TestResampleAlign:
    def test_knots_are_returned_exactly(self):
        t = np.arange(10) / 28.0
        streams = [SampleStream(c, t, np.arange(10.0) + k) for k, c in enumerate(CHANNELS)]
        ms = resample_align(streams, 28.0)
        for k, c in enumerate(CHANNELS):
            np.testing.assert_array_equal(ms[c], np.arange(10.0) + k)

    def test_linear_midpoint(self):
        a = SampleStream(LT, [0.0, 0.1], [1.0, 3.0])
        ms = resample_align([a], 20.0)
        np.testing.assert_allclose(ms.t, [0.0, 0.05, 0.1])
        assert ms[LT][1] == pytest.approx(2.0, abs=1e-12)

    def test_jittered_streams_match_segment_oracle(self, rng):
        streams = []
        for c in (LT, RT):
            t = np.arange(60) / 28.0 + rng.uniform(-0.005, 0.005, 60) + 0.01
            streams.append(SampleStream(c, np.sort(t), rng.normal(1.0, 0.2, 60)))
        ms = resample_align(streams, 28.0)
        for s in streams:
            want = _piecewise(ms.t, s.t, s.v)
            np.testing.assert_allclose(ms[s.channel], want, rtol=1e-12, atol=1e-15)

    def test_grid_is_intersection(self):
        a = SampleStream(LT, [0.0, 1.0, 2.0], [0.0, 1.0, 2.0])
        b = SampleStream(RT, [0.5, 1.5, 2.5], [0.0, 1.0, 2.0])
        ms = resample_align([a, b], 4.0)
        assert ms.t[0] == 0.5 and ms.t[-1] <= 2.0
        np.testing.assert_allclose(np.diff(ms.t), 0.25)

    def test_errors(self):
        a = SampleStream(LT, [0.0, 1.0], [0.0, 1.0])
        with pytest.raises(AlignmentError):
            resample_align([a, SampleStream(RT, [2.0, 3.0], [0.0, 1.0])])
        with pytest.raises(InputError):
            resample_align([SampleStream(LT, [0.0], [1.0])])
        with pytest.raises(InputError):
            resample_align([a, a])
        with pytest.raises(ParameterError):
            resample_align([a], 0.0)

    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=30), st.floats(5, 50))
    def test_values_bracketed_by_neighbours(self, vs, rate):
        t = np.cumsum(np.full(len(vs), 0.037))
        s = SampleStream(LS, t, vs)
        ms = resample_align([s], rate)
        k = np.clip(np.searchsorted(t, ms.t, side="right") - 1, 0, len(t) - 2)
        lo = np.minimum(np.array(vs)[k], np.array(vs)[k + 1])
        hi = np.maximum(np.array(vs)[k], np.array(vs)[k + 1])
        assert np.all(ms[LS] >= lo - 1e-12) and np.all(ms[LS] <= hi + 1e-12)

    @given(st.integers(2, 40), st.floats(0, 3))
    def test_idempotent_on_aligned_input(self, n, t0):
        ms = make_ms(np.sin(np.arange(n)), t0=t0)
        again = resample_align([ms.stream(c) for c in ms.channels], ms.grid_rate)
        assert len(again) == len(ms)
        for c in CHANNELS:
            np.testing.assert_allclose(again[c], ms[c], rtol=0, atol=1e-12)


class TestWindow:
    def test_full_range_is_identity(self):
        ms = make_ms(np.arange(28.0))
        assert window(ms, 0.0, 1.0) == ms

    def test_five_seconds_is_140_points(self):
        ms = make_ms(np.zeros(400))
        w = window(ms, 1.0, 5.0)
        assert len(w) == 140
        assert w.t[0] == pytest.approx(1.0)
        assert w.channels == ms.channels

    def test_out_of_range(self):
        ms = make_ms(np.zeros(56))
        with pytest.raises(RangeError):
            window(ms, 3.0, 1.0)
        with pytest.raises(RangeError):
            window(ms, 1.5, 1.0)
        with pytest.raises(ParameterError):
            window(ms, 0.0, 0.0)

    @given(st.floats(0, 4), st.floats(0.1, 3))
    def test_nested_window(self, a, b):
        ms = make_ms(np.arange(300.0))
        try:
            w = window(ms, a, b)
        except RangeError:
            return
        assert window(w, 0, b) == w

    def test_uniform_grid(self):
        g = uniform_grid(0.5, 1.0, 4.0)
        np.testing.assert_allclose(g, [0.5, 0.75, 1.0])


class TestMultiStream:
    def test_channels_sorted_and_matrix(self):
        ms = MultiStream(np.arange(3) / 28.0, {RS: [1, 2, 3], LT: [4, 5, 6]}, 28.0)
        assert ms.channels == (LT, RS)
        np.testing.assert_array_equal(ms.matrix(), [[4, 1], [5, 2], [6, 3]])

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            MultiStream(np.arange(3.0), {LT: [1.0, 2.0]}, 1.0)

    def test_duration(self):
        assert make_ms(np.zeros(28)).duration == pytest.approx(1.0)
