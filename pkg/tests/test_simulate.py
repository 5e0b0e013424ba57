from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photostep.errors import ParameterError
from photostep.gait import StepEvent
from photostep.pipeline import process
from photostep.evaluate import match_steps
from photostep.signal import CHANNELS, Foot
from photostep.simulate import (
    LightMap,
    LightSource,
    SubjectProfile,
    Track,
    WalkScenario,
    acquire,
    default_profiles,
    generate,
    grid_lights,
    lap_path,
    sample_count,
    serpentine_path,
    step_times,
)


def test_cadence_two_ten_seconds():
    _, gt = generate(SubjectProfile("s", cadence=2.0), LightMap(()), WalkScenario(((0, 0),), duration=10.0))
    assert len(gt.steps) == 20
    assert all(a.foot != b.foot for a, b in zip(gt.steps, gt.steps[1:]))


def test_stationary_zero_amplitude_is_constant():
    lights = grid_lights(5, 5, 2, 2)
    ms, _ = generate(SubjectProfile("s", amplitude=0.0), lights, WalkScenario(((1.0, 2.0),), speed=0.0, duration=5))
    for c in CHANNELS:
        assert np.ptp(ms[c]) == 0.0


def test_same_seed_is_bitwise_identical():
    p = default_profiles()[2]
    sc = WalkScenario(lap_path(8, 6), duration=12, noise_sigma=0.05, seed=9)
    a, ta = generate(p, grid_lights(8, 6, 2, 2), sc)
    b, tb = generate(p, grid_lights(8, 6, 2, 2), sc)
    assert a == b and ta.steps == tb.steps


def test_acquire_shares_draws_with_generate():
    p = default_profiles()[0]
    sc = WalkScenario(lap_path(8, 6), duration=6, seed=4)
    ms, gt = generate(p, grid_lights(8, 6, 2, 2), sc)
    streams, gt2 = acquire(p, grid_lights(8, 6, 2, 2), sc)
    assert gt.steps == gt2.steps
    assert len(streams[0]) == len(ms) == sample_count(6, 28.0)
    # millisecond clock
    np.testing.assert_array_equal(streams[0].t, np.round(streams[0].t * 1000) / 1000)


@given(st.floats(0.5, 3.0), st.floats(0.0, 0.3), st.integers(0, 1000))
def test_step_gaps_within_jitter_bounds(c, j, seed):
    p = SubjectProfile("s", cadence=c, cadence_jitter=j)
    t = step_times(p, 20.0, np.random.default_rng(seed))
    g = np.diff(t)
    assert np.all(g >= 1 / (c * (1 + j)) - 1e-12)
    assert np.all(g <= 1 / (c * (1 - j)) + 1e-12)


def test_baseline_formula():
    lm = LightMap((LightSource(0.0, 0.0, 2.7, 2.0),), ambient=0.5)
    assert lm.level(np.array(1.0), np.array(0.0)) == pytest.approx(0.5 + 2.0 / 2.0)


def test_positions_three_metres_apart_are_separable():
    lm = grid_lights(12, 8, 4, 3, seed=3)
    rng = np.random.default_rng(0)
    diffs = []
    for _ in range(200):
        a = rng.uniform([0, 0], [12, 8])
        ang = rng.uniform(0, 2 * np.pi)
        b = a + 3.0 * np.array([np.cos(ang), np.sin(ang)])
        diffs.append(abs(lm.level(*a) - lm.level(*b)))
    assert np.median(diffs) > 0.01 and min(diffs) > 0


def test_track_holds_at_end():
    tr = Track.from_path(((0, 0), (2, 0)), speed=1.0, duration=5.0)
    assert tr(1.0) == pytest.approx((1.0, 0.0))
    assert tr(5.0) == pytest.approx((2.0, 0.0))
    assert tr.t[-1] == 5.0
    short = Track.from_path(((0, 0), (10, 0)), speed=1.0, duration=4.0)
    assert short(4.0) == pytest.approx((4.0, 0.0))


def test_paths():
    assert lap_path(10, 5, 1)[0] == lap_path(10, 5, 1)[-1]
    sp = serpentine_path(6, 3, 1.0, 0.5)
    ys = sorted({p[1] for p in sp})
    assert np.allclose(np.diff(ys), 1.0)


def test_dropout_keeps_truth_and_hides_signal():
    p = SubjectProfile("s", cadence=2.0)
    sc = WalkScenario(((0, 0),), speed=0.0, duration=30, seed=2, dropout=0.2)
    ms, gt = generate(p, LightMap(()), sc)
    clean, gt0 = generate(p, LightMap(()), WalkScenario(((0, 0),), speed=0.0, duration=30, seed=2))
    assert gt.steps == gt0.steps
    assert len(process(ms).detected) < len(process(clean).detected)


def test_max_steps():
    _, gt = generate(SubjectProfile("s"), LightMap(()), WalkScenario(((0, 0),), duration=30, max_steps=7))
    assert len(gt.steps) == 7


def test_validation():
    with pytest.raises(ParameterError):
        SubjectProfile("s", cadence=0)
    with pytest.raises(ParameterError):
        WalkScenario(((0, 0),), duration=0)
    with pytest.raises(ParameterError):
        WalkScenario((), duration=1)
    with pytest.raises(ParameterError):
        WalkScenario(((0, 0),), dropout=1.0)
    with pytest.raises(ParameterError):
        LightMap((LightSource(0, 0, 0.0),))


def test_default_profiles_cadence_separation():
    cs = sorted(p.cadence for p in default_profiles())
    assert len(cs) == 6 and min(np.diff(cs)) >= 0.1 - 1e-12


def test_zero_noise_pipeline_closure():
    lights = grid_lights(10, 6, 3, 2)
    total = hit = 0
    for k, p in enumerate(default_profiles()):
        ms, gt = generate(p, lights, WalkScenario(lap_path(10, 6), duration=20, seed=k))
        steps = process(ms).steps
        total += len(gt.steps)
        hit += match_steps(steps, gt.steps, 1 / 28 + 1e-9)
    assert hit / total >= 0.99


def test_truth_alternates_from_start_foot():
    _, gt = generate(SubjectProfile("s"), LightMap(()), WalkScenario(((0, 0),), duration=5, start_foot=Foot.LEFT))
    assert gt.steps[0].foot is Foot.LEFT and isinstance(gt.steps[0], StepEvent)
