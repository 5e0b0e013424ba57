"""Step events, missing-step repair, foot posture and feature records.

A step shows up on the shoe cells as a level, a decline and a sharp rise.
On the derivative this is a negative excursion followed by a positive one;
the event is stamped at the positive peak.

Foot posture is a cyclic value in ``[0, 2)``: 0 marks a right step, 1 a
left step, and values in between are linearly interpolated in time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InputError, ParameterError, RangeError
from .preprocess import DerivStream
from .signal import CHANNELS, ChannelId, Foot, MultiStream, Placement

#: Longest same-foot gap that is still repaired with a complementary step.
DEFAULT_T_THR = 2.0
DEFAULT_REFRACTORY = 0.25
#: A rise only counts if it starts within this many seconds of the dip.
MAX_RISE_DELAY = 1.0
POSTURE_PERIOD = 2.0
# slopes below this (V/s) are rounding residue, never a step
MIN_SLOPE = 1e-6


class Origin(enum.Enum):
    DETECTED = "detected"
    COMPLEMENTED = "complemented"


@dataclass(frozen=True)
class StepEvent:
    t: float
    foot: Foot
    origin: Origin = Origin.DETECTED

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise InputError("step time must be finite")


@dataclass(frozen=True)
class StepDetectorConfig:
    """Detector tuning.

    ``prominence_thr=None`` derives the threshold from each trace with
    :func:`auto_threshold`.
    """

    prominence_thr: float | None = None
    refractory: float = DEFAULT_REFRACTORY
    t_thr: float = DEFAULT_T_THR
    placements: tuple[Placement, ...] = (Placement.TOP,)
    auto_factor: float = 2.0
    peak_fraction: float = 0.5

    def __post_init__(self):
        if self.prominence_thr is not None and not self.prominence_thr > 0:
            raise ParameterError("prominence_thr must be positive")
        if not (self.refractory > 0 and self.t_thr > 0):
            raise ParameterError("refractory and t_thr must be positive")
        if not self.refractory < self.t_thr:
            raise ParameterError("refractory must be shorter than t_thr")
        if not self.placements:
            raise ParameterError("at least one placement is required")
        if not self.auto_factor > 0 or not self.peak_fraction >= 0:
            raise ParameterError("auto_factor must be positive and peak_fraction non-negative")


@dataclass(frozen=True)
class PosturePoint:
    t: float
    posture: float

    def __post_init__(self):
        if not 0.0 <= self.posture < POSTURE_PERIOD:
            raise InputError(f"posture {self.posture} outside [0, 2)")


@dataclass(frozen=True)
class FeatureRecord:
    t: float
    posture: float
    voltages: Mapping[ChannelId, float]
    subject: str | None = None
    location: tuple[float, float] | None = None

    def __post_init__(self):
        if set(self.voltages) != set(CHANNELS):
            raise InputError("a feature record needs all four channels")
        if not 0.0 <= self.posture < POSTURE_PERIOD:
            raise InputError(f"posture {self.posture} outside [0, 2)")

    def vector(self) -> list[float]:
        return [self.voltages[c] for c in CHANNELS]


def auto_threshold(d: np.ndarray, factor: float = 2.0, peak_fraction: float = 0.5) -> float:
    """Trace-relative threshold: the larger of ``factor`` times the median
    absolute slope and ``peak_fraction`` of its 95th percentile.

    Both terms scale with the illumination level. The percentile term keeps
    slow baseline drifts under the lights from being read as steps.
    """
    if d.size == 0:
        return MIN_SLOPE
    a = np.abs(d)
    return max(factor * float(np.median(a)), peak_fraction * float(np.quantile(a, 0.95)), MIN_SLOPE)


def _refine(d: list[float], k: int) -> float:
    """Sub-sample offset of a local maximum from a parabola through 3 samples."""
    if 0 < k < len(d) - 1:
        y0, y1, y2 = d[k - 1], d[k], d[k + 1]
        den = y0 - 2.0 * y1 + y2
        if den < 0:
            return 0.5 * (y0 - y2) / den
    return 0.0


def _hysteresis_peaks(t: np.ndarray, d: np.ndarray, thr: float, refractory: float, shift: float) -> list[float]:
    """Times of positive peaks that follow a dip below ``-thr`` within 1 s.

    ``shift`` (seconds) is added to every refined peak time.
    """
    ts = t.tolist()
    ds = d.tolist()
    dt = (ts[-1] - ts[0]) / (len(ts) - 1) if len(ts) > 1 else 0.0
    events: list[float] = []
    last = -math.inf
    dip_t = None  # most recent sample below -thr
    rising = False
    peak_v, peak_k = 0.0, 0

    def emit():
        nonlocal last
        tp = ts[peak_k] + _refine(ds, peak_k) * dt + shift
        if tp - last >= refractory:
            events.append(tp)
            last = tp

    for k, x in enumerate(ds):
        if rising:
            if x > thr:
                if x > peak_v:
                    peak_v, peak_k = x, k
                continue
            rising = False
            dip_t = None
            emit()
        if x < -thr:
            dip_t = ts[k]
        elif x > thr and dip_t is not None and ts[k] - dip_t <= MAX_RISE_DELAY:
            rising = True
            peak_v, peak_k = x, k
    if rising:
        emit()
    return events


def detect_steps(ds: MultiStream, foot: Foot, cfg: StepDetectorConfig | None = None) -> list[StepEvent]:
    """Steps of one foot from a derivative stream.

    The event time is the sub-sample position of the positive peak. For a
    :class:`DerivStream` it is moved back half a grid step, since a backward
    difference measures the slope at the middle of its interval.

    With several placements configured, detections from the individual
    cells are OR-ed: events closer than the refractory time collapse onto
    the earliest one.
    """
    cfg = cfg or StepDetectorConfig()
    shift = -0.5 / ds.grid_rate if isinstance(ds, DerivStream) else 0.0
    times: list[float] = []
    for placement in cfg.placements:
        ch = ChannelId(foot, placement)
        if ch not in ds.values:
            raise InputError(f"derivative stream lacks channel {ch}")
        d = ds[ch]
        if d.size == 0:
            continue
        if cfg.prominence_thr is not None:
            thr = cfg.prominence_thr
        else:
            thr = auto_threshold(d, cfg.auto_factor, cfg.peak_fraction)
        times.extend(_hysteresis_peaks(ds.t, d, thr, cfg.refractory, shift))
    times.sort()
    merged: list[float] = []
    for ti in times:
        if not merged or ti - merged[-1] >= cfg.refractory:
            merged.append(ti)
    return [StepEvent(ti, foot) for ti in merged]


def detect_both(ds: MultiStream, cfg: StepDetectorConfig | None = None) -> list[StepEvent]:
    """Left and right detections merged into one time-ordered list."""
    events = detect_steps(ds, Foot.LEFT, cfg) + detect_steps(ds, Foot.RIGHT, cfg)
    return sorted(events, key=lambda e: (e.t, e.foot.value))


def _check_sorted(events: Sequence[StepEvent]) -> None:
    for a, b in zip(events, events[1:]):
        if b.t < a.t:
            raise InputError(f"step events not sorted: {b.t} follows {a.t}")


def complement_missing(events: Sequence[StepEvent], t_thr: float = DEFAULT_T_THR) -> list[StepEvent]:
    """Insert an opposite-foot step midway between close same-foot steps.

    Replays the streaming rule over a recorded sequence: whenever the
    current step uses the same foot as the previous one and follows it by
    less than ``t_thr`` seconds, a complemented step for the other foot is
    added at the midpoint.
    """
    if not t_thr > 0:
        raise ParameterError("t_thr must be positive")
    _check_sorted(events)
    out: list[StepEvent] = []
    prev: StepEvent | None = None
    for now in events:
        if prev is not None and prev.foot == now.foot and now.t - prev.t < t_thr:
            out.append(StepEvent((now.t + prev.t) / 2, now.foot.opposite, Origin.COMPLEMENTED))
        out.append(now)
        prev = now
    return out


def _anchors(events: Sequence[StepEvent]) -> np.ndarray:
    """Unwrapped posture anchors: right steps land on even, left on odd values."""
    if not events:
        return np.empty(0)
    for a, b in zip(events, events[1:]):
        if a.foot == b.foot:
            raise InputError(
                f"consecutive {a.foot.name} steps at {a.t} and {b.t}; complement missing steps first"
            )
    first = 0.0 if events[0].foot is Foot.RIGHT else 1.0
    return first + np.arange(len(events), dtype=float)


def interpolate_posture(events: Sequence[StepEvent], t_interval: float) -> list[PosturePoint]:
    """Posture samples every ``t_interval`` seconds between consecutive steps.

    Each inter-step segment starts at the earlier step's time; nothing is
    emitted after the last step.
    """
    if not t_interval > 0:
        raise ParameterError("t_interval must be positive")
    _check_sorted(events)
    anchors = _anchors(events)
    points: list[PosturePoint] = []
    for k in range(1, len(events)):
        t_prev, t_now = events[k - 1].t, events[k].t
        foot_prev, foot_now = anchors[k - 1], anchors[k]
        n = 0
        t = t_prev
        while t < t_now:
            inter = foot_prev + (t - t_prev) * abs(foot_now - foot_prev) / (t_now - t_prev)
            points.append(PosturePoint(t, _wrap(inter)))
            n += 1
            t = t_prev + n * t_interval
    return points


def _wrap(p: float) -> float:
    w = math.fmod(p, POSTURE_PERIOD)
    if w < 0:
        w += POSTURE_PERIOD
    # fmod of a value a hair under 2 can round up to exactly 2
    return 0.0 if w >= POSTURE_PERIOD else w


def posture_at(events: Sequence[StepEvent], times: np.ndarray) -> np.ndarray:
    """Posture at arbitrary times inside ``[first step, last step]``.

    Same piecewise-linear curve as :func:`interpolate_posture`, evaluated
    directly at the requested times.
    """
    _check_sorted(events)
    anchors = _anchors(events)
    times = np.asarray(times, dtype=float)
    if len(events) < 2:
        raise InputError("posture needs at least two steps")
    ts = np.array([e.t for e in events])
    if times.size and (times.min() < ts[0] or times.max() > ts[-1]):
        raise RangeError("posture requested outside the stepped interval")
    p = np.mod(np.interp(times, ts, anchors), POSTURE_PERIOD)
    p[p >= POSTURE_PERIOD] = 0.0
    return p


def alternating_runs(events: Sequence[StepEvent]) -> list[list[StepEvent]]:
    """Split a step sequence wherever the same foot repeats."""
    runs: list[list[StepEvent]] = []
    for e in events:
        if runs and runs[-1][-1].foot != e.foot:
            runs[-1].append(e)
        else:
            runs.append([e])
    return runs


def assemble_features(
    ms: MultiStream,
    postures: Sequence[PosturePoint],
    subject: str | None = None,
    path: Callable[[float], tuple[float, float]] | None = None,
) -> list[FeatureRecord]:
    """One record per posture point, with all channel values at that time.

    Channel values between grid points are linearly interpolated, so a
    posture point on a grid time reads the grid value exactly.
    """
    if not postures:
        return []
    ts = np.array([p.t for p in postures])
    lo, hi = ms.t[0], ms.t[-1]
    if ts.min() < lo or ts.max() > hi:
        raise RangeError(f"posture times [{ts.min()}, {ts.max()}] outside grid [{lo}, {hi}]")
    cols = {c: np.interp(ts, ms.t, ms[c]) for c in CHANNELS}
    records = []
    for k, p in enumerate(postures):
        loc = None
        if path is not None:
            x, y = path(p.t)
            loc = (float(x), float(y))
        records.append(
            FeatureRecord(
                t=p.t,
                posture=p.posture,
                voltages={c: float(cols[c][k]) for c in CHANNELS},
                subject=subject,
                location=loc,
            )
        )
    return records
