"""Synthetic shoe-cell photovoltage with ground truth.

The baseline level of every cell depends on where the walker is under the
lights, ``ambient + sum(I / (1 + d**2))`` with ``d`` the horizontal distance
to each source. Each step superimposes a dip-rise template on the stepping
foot's two cells: a negative half-sine followed by a positive one, with the
steepest rise at the nominal step time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .gait import Origin, StepEvent
from .signal import CHANNELS, DEFAULT_RATE, ChannelId, Foot, MultiStream, Placement, SampleStream


@dataclass(frozen=True)
class SubjectProfile:
    """Gait parameters that make a walker recognisable.

    ``width_frac`` sets the signature width as a fraction of the step
    period; ``rise_ratio`` scales the rising lobe against the dip.
    """

    name: str
    cadence: float = 2.0
    cadence_jitter: float = 0.0
    amplitude: float = 0.3
    asymmetry: float = 1.0
    width_frac: float = 0.4
    rise_ratio: float = 1.0
    side_gain: float = 0.6

    def __post_init__(self):
        if not self.cadence > 0:
            raise ParameterError("cadence must be positive")
        if not self.amplitude >= 0:
            raise ParameterError("amplitude must be non-negative")
        if not 0 <= self.cadence_jitter < 1:
            raise ParameterError("cadence_jitter must lie in [0, 1)")
        if not 0 < self.width_frac <= 1:
            raise ParameterError("width_frac must lie in (0, 1]")

    @property
    def width(self) -> float:
        return self.width_frac / self.cadence


@dataclass(frozen=True)
class LightSource:
    x: float
    y: float
    height: float = 2.7
    intensity: float = 1.0


@dataclass(frozen=True)
class LightMap:
    sources: tuple[LightSource, ...]
    ambient: float = 0.5
    side_factor: float = 0.55

    def __post_init__(self):
        for s in self.sources:
            if s.intensity < 0 or not s.height > 0:
                raise ParameterError("light sources need intensity >= 0 and height > 0")

    def level(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Top-cell baseline voltage at floor positions."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.full(np.broadcast(x, y).shape, self.ambient, dtype=float)
        for s in self.sources:
            out += s.intensity / (1.0 + (x - s.x) ** 2 + (y - s.y) ** 2)
        return out


@dataclass(frozen=True)
class WalkScenario:
    path: tuple[tuple[float, float], ...]
    speed: float = 1.0
    duration: float = 30.0
    rate: float = DEFAULT_RATE
    noise_sigma: float = 0.0
    seed: int = 0
    start_foot: Foot = Foot.RIGHT
    # per-walk multipliers on the subject's cadence and signature amplitude
    tempo: float = 1.0
    gain: float = 1.0
    # stop after this many steps (None: fill the duration)
    max_steps: int | None = None
    # fraction of steps whose signature is left out of the signal; they stay in the truth
    dropout: float = 0.0

    def __post_init__(self):
        if self.max_steps is not None and self.max_steps < 0:
            raise ParameterError("max_steps must be non-negative")
        if not 0.0 <= self.dropout < 1.0:
            raise ParameterError("dropout must lie in [0, 1)")
        if not self.tempo > 0 or not self.gain >= 0:
            raise ParameterError("tempo must be positive and gain non-negative")
        if not self.rate > 0 or not self.duration > 0:
            raise ParameterError("rate and duration must be positive")
        if self.speed < 0 or self.noise_sigma < 0:
            raise ParameterError("speed and noise_sigma must be non-negative")
        if not self.path:
            raise ParameterError("path needs at least one point")


@dataclass(frozen=True, eq=False)
class Track:
    """Piecewise-linear position in time, held constant past the last knot."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __call__(self, t):
        tt = np.asarray(t, dtype=float)
        px = np.interp(tt, self.t, self.x)
        py = np.interp(tt, self.t, self.y)
        if tt.ndim == 0:
            return float(px), float(py)
        return px, py

    def __eq__(self, other):
        if not isinstance(other, Track):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in ((self.t, other.t), (self.x, other.x), (self.y, other.y)))

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_path(cls, path: Sequence[tuple[float, float]], speed: float, duration: float) -> "Track":
        pts = np.asarray(path, dtype=float).reshape(-1, 2)
        seg = np.hypot(*np.diff(pts, axis=0).T) if len(pts) > 1 else np.empty(0)
        if speed > 0 and seg.size:
            times = np.concatenate([[0.0], np.cumsum(seg) / speed])
        else:
            times = np.zeros(1)
            pts = pts[:1]
        keep = times < duration
        t = times[keep]
        xy = pts[keep]
        if t[-1] < duration:
            # end exactly at the duration, mid-segment if need be
            ex = np.interp(duration, times, pts[:, 0]) if times.size > 1 else pts[0, 0]
            ey = np.interp(duration, times, pts[:, 1]) if times.size > 1 else pts[0, 1]
            t = np.append(t, duration)
            xy = np.vstack([xy, [ex, ey]])
        return cls(t, xy[:, 0].copy(), xy[:, 1].copy())


@dataclass(frozen=True)
class GroundTruth:
    steps: tuple[StepEvent, ...]
    track: Track
    subject: str
    duration: float


def default_profiles() -> list[SubjectProfile]:
    """Six walkers with cadences 0.1 steps/s apart and distinct signatures."""
    return [
        SubjectProfile("s1", cadence=1.6, cadence_jitter=0.03, amplitude=0.30, asymmetry=1.00, width_frac=0.40, rise_ratio=1.0),
        SubjectProfile("s2", cadence=1.7, cadence_jitter=0.03, amplitude=0.22, asymmetry=1.25, width_frac=0.34, rise_ratio=0.7),
        SubjectProfile("s3", cadence=1.8, cadence_jitter=0.03, amplitude=0.38, asymmetry=0.80, width_frac=0.46, rise_ratio=1.3),
        SubjectProfile("s4", cadence=1.9, cadence_jitter=0.03, amplitude=0.26, asymmetry=0.90, width_frac=0.30, rise_ratio=1.5),
        SubjectProfile("s5", cadence=2.0, cadence_jitter=0.03, amplitude=0.34, asymmetry=1.15, width_frac=0.38, rise_ratio=0.8),
        SubjectProfile("s6", cadence=2.1, cadence_jitter=0.03, amplitude=0.20, asymmetry=1.05, width_frac=0.42, rise_ratio=1.2),
    ]


def grid_lights(width: float, depth: float, nx: int, ny: int, intensity: float = 1.0, jitter: float = 0.35, seed: int = 7) -> LightMap:
    """Ceiling lights on a regular grid with seeded intensity variation.

    Unequal intensities make the level map non-uniform, which is what lets
    positions be told apart.
    """
    rng = np.random.default_rng(seed)
    xs = (np.arange(nx) + 0.5) * width / nx
    ys = (np.arange(ny) + 0.5) * depth / ny
    sources = []
    for x in xs:
        for y in ys:
            k = intensity * (1.0 + jitter * rng.uniform(-1, 1))
            sources.append(LightSource(float(x), float(y), 2.7, float(k)))
    return LightMap(tuple(sources))


def step_times(profile: SubjectProfile, duration: float, rng: np.random.Generator) -> np.ndarray:
    """Nominal step instants in seconds.

    Every gap lies in ``[1/(c(1+j)), 1/(c(1-j))]``; a step is kept only if
    its whole signature fits inside the recording.
    """
    half = profile.width / 2
    times = []
    t = 0.5 / profile.cadence
    while t + half <= duration:
        times.append(t)
        u = rng.uniform(-1.0, 1.0) if profile.cadence_jitter else 0.0
        t += 1.0 / (profile.cadence * (1.0 + u * profile.cadence_jitter))
    return np.array(times)


def _template(u: np.ndarray, rise_ratio: float) -> np.ndarray:
    """Dip-rise shape on ``u`` in [-0.5, 0.5]; zero outside."""
    out = np.zeros_like(u)
    dip = (u >= -0.5) & (u < 0.0)
    rise = (u >= 0.0) & (u <= 0.5)
    out[dip] = -np.sin(2 * np.pi * (u[dip] + 0.5))
    out[rise] = rise_ratio * np.sin(2 * np.pi * u[rise])
    return out


@dataclass(frozen=True)
class _Walk:
    profile: SubjectProfile
    lights: LightMap
    scenario: WalkScenario
    truth: GroundTruth
    hidden: frozenset = frozenset()

    def render(self, times: np.ndarray, rng: np.random.Generator) -> dict[ChannelId, np.ndarray]:
        p, sc = self.profile, self.scenario
        x, y = self.truth.track(times)
        top = self.lights.level(x, y)
        base = {Placement.TOP: top, Placement.SIDE: self.lights.side_factor * top}
        gain = {Placement.TOP: 1.0, Placement.SIDE: p.side_gain}
        amp = {Foot.LEFT: p.amplitude * p.asymmetry, Foot.RIGHT: p.amplitude}
        bumps = {Foot.LEFT: np.zeros_like(times), Foot.RIGHT: np.zeros_like(times)}
        w = p.width
        for k, e in enumerate(self.truth.steps):
            if k in self.hidden:
                continue
            lo, hi = np.searchsorted(times, [e.t - w / 2, e.t + w / 2 + 1e-12])
            if hi > lo:
                bumps[e.foot][lo:hi] += amp[e.foot] * _template((times[lo:hi] - e.t) / w, p.rise_ratio)
        out = {}
        for ch in CHANNELS:
            out[ch] = base[ch.placement] + gain[ch.placement] * bumps[ch.foot]
        if sc.noise_sigma > 0:
            for ch in CHANNELS:
                out[ch] = out[ch] + rng.normal(0.0, sc.noise_sigma, size=times.size)
        return out


def _prepare(profile: SubjectProfile, lights: LightMap, scenario: WalkScenario) -> tuple[_Walk, np.random.Generator]:
    if scenario.tempo != 1.0 or scenario.gain != 1.0:
        profile = replace(profile, cadence=profile.cadence * scenario.tempo, amplitude=profile.amplitude * scenario.gain)
    rng = np.random.default_rng(scenario.seed)
    ts = step_times(profile, scenario.duration, rng)
    if scenario.max_steps is not None:
        ts = ts[: scenario.max_steps]
    hidden: frozenset = frozenset()
    if scenario.dropout > 0:
        # separate stream so dropout leaves the step and noise draws unchanged
        drop = np.random.default_rng([scenario.seed, 1]).random(ts.size) < scenario.dropout
        hidden = frozenset(np.flatnonzero(drop).tolist())
    feet = [scenario.start_foot if k % 2 == 0 else scenario.start_foot.opposite for k in range(ts.size)]
    steps = tuple(StepEvent(float(t), f, Origin.DETECTED) for t, f in zip(ts, feet))
    track = Track.from_path(scenario.path, scenario.speed, scenario.duration)
    truth = GroundTruth(steps, track, profile.name, scenario.duration)
    return _Walk(profile, lights, scenario, truth, hidden), rng


def generate(profile: SubjectProfile, lights: LightMap, scenario: WalkScenario) -> tuple[MultiStream, GroundTruth]:
    """Four channels on the uniform grid ``k / rate`` covering ``[0, duration)``."""
    walk, rng = _prepare(profile, lights, scenario)
    times = np.arange(sample_count(scenario.duration, scenario.rate)) / scenario.rate
    return MultiStream(times, walk.render(times, rng), scenario.rate), walk.truth


def sample_count(duration: float, rate: float) -> int:
    """Number of instants ``k / rate`` falling in ``[0, duration)``."""
    return int(math.ceil(duration * rate - 1e-9))


def acquisition_times(duration: float, rate: float) -> np.ndarray:
    """Sample instants of a logger with a millisecond clock, in seconds."""
    return np.round(np.arange(sample_count(duration, rate)) * 1000.0 / rate) / 1000.0


def acquire(profile: SubjectProfile, lights: LightMap, scenario: WalkScenario) -> tuple[list[SampleStream], GroundTruth]:
    """Raw per-channel readings as a millisecond-clock logger would record them.

    The same seed produces the same steps and noise draws as :func:`generate`;
    only the sampling instants differ.
    """
    walk, rng = _prepare(profile, lights, scenario)
    times = acquisition_times(scenario.duration, scenario.rate)
    vals = walk.render(times, rng)
    return [SampleStream(ch, times, vals[ch], scenario.rate) for ch in CHANNELS], walk.truth


def lap_path(width: float = 16.0, depth: float = 9.0, margin: float = 1.0) -> tuple[tuple[float, float], ...]:
    """Rectangular route with four 90-degree turns, starting and ending at one corner."""
    a, b = margin, margin
    c, d = width - margin, depth - margin
    return ((a, b), (c, b), (c, d), (a, d), (a, b))


def serpentine_path(width: float, depth: float, spacing: float = 1.0, margin: float = 0.5) -> tuple[tuple[float, float], ...]:
    """Back-and-forth lanes ``spacing`` metres apart covering a rectangle."""
    pts = []
    y = margin
    forward = True
    while y <= depth - margin + 1e-9:
        xs = (margin, width - margin) if forward else (width - margin, margin)
        pts.append((xs[0], y))
        pts.append((xs[1], y))
        y += spacing
        forward = not forward
    return tuple(pts)
