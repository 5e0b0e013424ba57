"""Simulator-backed experiment harnesses.

Each harness takes a frozen setup, is deterministic under its seeds and
returns plain result objects that the CLI renders and the acceptance
tests check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoMatchError
from .evaluate import ConfusionMatrix, LocalizationReport, StepMetrics, confusion, localization_report, match_steps, step_metrics_suite
from .gait import FeatureRecord
from .pipeline import PipelineConfig, feature_records, process
from .recognition import FingerprintDb, KnnConfig, build_db, identify, localize, records_to_seq, slice_windows
from .similarity import Metric
from .simulate import (
    SubjectProfile,
    WalkScenario,
    default_profiles,
    generate,
    grid_lights,
    lap_path,
    serpentine_path,
)

ALL_METRICS = (Metric.MODIFIED_DTW, Metric.EUCLIDEAN, Metric.FULL_DTW)


def _lap_variation(rng: np.random.Generator, tempo_var: float, gain_var: float) -> tuple[float, float]:
    return 1.0 + tempo_var * rng.uniform(-1, 1), 1.0 + gain_var * rng.uniform(-1, 1)


# -- identification --------------------------------------------------------


@dataclass(frozen=True)
class IdentificationSetup:
    """Leave-one-lap-out identification on a rectangular lap.

    Every lap gets its own tempo and signature gain, drawn uniformly within
    ``tempo_var`` and ``gain_var`` of 1, so repeated laps of one walker are
    similar but not time-aligned copies.
    """

    profiles: tuple[SubjectProfile, ...] = field(default_factory=lambda: tuple(default_profiles()))
    n_laps: int = 5
    room: tuple[float, float] = (18.0, 11.0)
    lights: tuple[int, int] = (6, 5)
    speed: float = 1.1
    duration: float = 40.0
    noise_sigma: float = 0.02
    tempo_var: float = 0.05
    gain_var: float = 0.2
    window_s: float = 5.0
    db_stride: float = 1.0
    query_stride: float = 5.0
    k: int = 1
    features: str = "slope"
    seed: int = 5


@dataclass(frozen=True)
class IdentificationResult:
    metric: Metric
    accuracy: float  # fraction
    confusion: ConfusionMatrix
    n_queries: int
    no_match: int
    seconds: float


def simulate_laps(setup: IdentificationSetup) -> dict[tuple[str, int], list[FeatureRecord]]:
    w, d = setup.room
    lights = grid_lights(w, d, *setup.lights)
    path = lap_path(w, d)
    rng = np.random.default_rng(setup.seed)
    cfg = PipelineConfig(features=setup.features)
    laps = {}
    for si, p in enumerate(setup.profiles):
        for lap in range(setup.n_laps):
            tempo, gain = _lap_variation(rng, setup.tempo_var, setup.gain_var)
            sc = WalkScenario(
                path, setup.speed, setup.duration, noise_sigma=setup.noise_sigma,
                seed=setup.seed * 100_003 + 1000 * si + lap, tempo=tempo, gain=gain,
            )
            ms, gt = generate(p, lights, sc)
            laps[(p.name, lap)] = feature_records(ms, cfg, p.name, gt.track)
    return laps


def identification_lolo(
    setup: IdentificationSetup | None = None,
    metrics: Sequence[Metric] = (Metric.MODIFIED_DTW, Metric.EUCLIDEAN),
    laps: dict | None = None,
) -> list[IdentificationResult]:
    setup = setup or IdentificationSetup()
    laps = laps if laps is not None else simulate_laps(setup)
    names = [p.name for p in setup.profiles]
    dbs = []
    queries = []
    for hold in range(setup.n_laps):
        train = [laps[(n, lap)] for n in names for lap in range(setup.n_laps) if lap != hold]
        dbs.append(build_db(train, setup.window_s, setup.db_stride, features=setup.features))
        qs = []
        for n in names:
            for _, win in slice_windows(laps[(n, hold)], setup.window_s, setup.query_stride):
                qs.append((n, records_to_seq(win)))
        queries.append(qs)
    out = []
    for m in metrics:
        cfg = KnnConfig(k=setup.k, metric=m)
        pairs = []
        no_match = 0
        t0 = time.perf_counter()
        for db, qs in zip(dbs, queries):
            for truth, q in qs:
                try:
                    pairs.append((truth, identify(q, db, cfg).subject))
                except NoMatchError:
                    pairs.append((truth, None))
                    no_match += 1
        secs = time.perf_counter() - t0
        cm = confusion(pairs)
        out.append(IdentificationResult(Metric.parse(m), cm.accuracy, cm, len(pairs), no_match, secs))
    return out


# -- localization ----------------------------------------------------------


@dataclass(frozen=True)
class LocalizationSetup:
    """Each walker covers the room on lanes ``spacing`` metres apart twice.

    The first walk fills the db, the second provides queries. Level
    features are used because the baseline light level carries position.
    """

    profiles: tuple[SubjectProfile, ...] = field(default_factory=lambda: tuple(default_profiles()))
    room: tuple[float, float] = (12.0, 8.0)
    lights: tuple[int, int] = (4, 3)
    light_seed: int = 3
    spacing: float = 1.0
    speed: float = 1.0
    duration: float = 100.0
    noise_sigma: float = 0.02
    tempo_var: float = 0.05
    gain_var: float = 0.2
    window_s: float = 5.0
    db_stride: float = 0.25
    query_stride: float = 2.5
    features: str = "level"
    seed: int = 11


def simulate_walks(setup: LocalizationSetup) -> tuple[list[list[FeatureRecord]], list[list[FeatureRecord]]]:
    w, d = setup.room
    lights = grid_lights(w, d, *setup.lights, seed=setup.light_seed)
    path = serpentine_path(w, d, setup.spacing)
    rng = np.random.default_rng(setup.seed)
    cfg = PipelineConfig(features=setup.features)
    walks: list[list[list[FeatureRecord]]] = [[], []]
    for si, p in enumerate(setup.profiles):
        for rep in range(2):
            tempo, gain = _lap_variation(rng, setup.tempo_var, setup.gain_var)
            sc = WalkScenario(
                path, setup.speed, setup.duration, noise_sigma=setup.noise_sigma,
                seed=setup.seed * 100_003 + 1000 * si + rep, tempo=tempo, gain=gain,
            )
            ms, gt = generate(p, lights, sc)
            walks[rep].append(feature_records(ms, cfg, p.name, gt.track))
    return walks[0], walks[1]


def _window_location(start: float, win: Sequence[FeatureRecord], window_s: float) -> tuple[float, float]:
    mid = start + window_s / 2
    return min(win, key=lambda r: abs(r.t - mid)).location


def localization_pairs(
    db: FingerprintDb, walks: Sequence[Sequence[FeatureRecord]], window_s: float, stride: float, cfg: KnnConfig
) -> tuple[list, int]:
    pairs = []
    no_match = 0
    for recs in walks:
        for start, win in slice_windows(recs, window_s, stride, db.grid_rate):
            try:
                est = localize(records_to_seq(win), db, cfg)
            except NoMatchError:
                no_match += 1
                continue
            pairs.append((est, _window_location(start, win, window_s)))
    return pairs, no_match


@dataclass(frozen=True)
class LocalizationResult:
    metric: Metric
    report: LocalizationReport
    no_match: int
    self_max_error: float
    db_size: int


def localization_experiment(
    setup: LocalizationSetup | None = None,
    metrics: Sequence[Metric] = (Metric.MODIFIED_DTW, Metric.EUCLIDEAN),
    walks: tuple | None = None,
    self_check: bool = True,
) -> list[LocalizationResult]:
    setup = setup or LocalizationSetup()
    train, test = walks if walks is not None else simulate_walks(setup)
    db = build_db(train, setup.window_s, setup.db_stride, features=setup.features)
    out = []
    for m in metrics:
        cfg = KnnConfig(metric=m)
        pairs, no_match = localization_pairs(db, test, setup.window_s, setup.query_stride, cfg)
        self_err = 0.0
        if self_check:
            for fp in db.entries:
                est = localize(fp.seq, db, cfg)
                self_err = max(self_err, math.hypot(est[0] - fp.location[0], est[1] - fp.location[1]))
        out.append(LocalizationResult(Metric.parse(m), localization_report(pairs), no_match, self_err, len(db)))
    return out


def window_sweep(
    windows: Sequence[float] = (0.5, 1.0, 2.0, 5.0, 10.0),
    setup: LocalizationSetup | None = None,
    metric: Metric = Metric.MODIFIED_DTW,
    walks: tuple | None = None,
) -> list[tuple[float, LocalizationReport]]:
    """Localization error for each window length on the same walks."""
    setup = setup or LocalizationSetup()
    train, test = walks if walks is not None else simulate_walks(setup)
    rows = []
    for w in windows:
        db = build_db(train, w, setup.db_stride, features=setup.features)
        pairs, _ = localization_pairs(db, test, w, setup.query_stride, KnnConfig(metric=metric))
        rows.append((float(w), localization_report(pairs)))
    return rows


# -- step counting ---------------------------------------------------------


@dataclass(frozen=True)
class ComplementSetup:
    """Long walks where a fraction of step signatures never reach the signal."""

    n_traces: int = 20
    n_steps: int = 1000
    dropout: float = 0.05
    noise_sigma: float = 0.02
    seed: int = 100


@dataclass(frozen=True)
class ComplementResult:
    before: StepMetrics
    after: StepMetrics


def complement_experiment(setup: ComplementSetup | None = None) -> ComplementResult:
    setup = setup or ComplementSetup()
    profiles = default_profiles()
    lights = grid_lights(18.0, 11.0, 6, 5)
    path = lap_path(18.0, 11.0)
    before = []
    after = []
    for i in range(setup.n_traces):
        p = profiles[i % len(profiles)]
        # long enough for n_steps at the slowest jittered cadence
        dur = setup.n_steps / (p.cadence * (1.0 - p.cadence_jitter)) + 2.0
        sc = WalkScenario(
            path, 1.1, dur, noise_sigma=setup.noise_sigma, seed=setup.seed + i,
            max_steps=setup.n_steps, dropout=setup.dropout,
        )
        ms, gt = generate(p, lights, sc)
        pr = process(ms)
        before.append((pr.detected, list(gt.steps)))
        after.append((pr.steps, list(gt.steps)))
    return ComplementResult(step_metrics_suite(before), step_metrics_suite(after))


@dataclass(frozen=True)
class RecoveryResult:
    noise_fraction: float
    truth: int
    detected: int
    recovered: int

    @property
    def rate(self) -> float:
        return self.recovered / self.truth if self.truth else 0.0


def step_recovery(noise_fraction: float, seeds: Sequence[int] = (1, 2), duration: float = 60.0) -> RecoveryResult:
    """Ground-truth steps detected within one sample, before complementing.

    Noise is ``noise_fraction`` times each subject's signature amplitude.
    """
    lights = grid_lights(18.0, 11.0, 6, 5)
    path = lap_path(18.0, 11.0)
    truth = det = hit = 0
    for k, p in enumerate(default_profiles()):
        for s in seeds:
            sc = WalkScenario(path, 1.1, duration, noise_sigma=noise_fraction * p.amplitude, seed=1000 * s + k)
            ms, gt = generate(p, lights, sc)
            pr = process(ms)
            truth += len(gt.steps)
            det += len(pr.detected)
            hit += match_steps(pr.detected, gt.steps, 1.0 / sc.rate + 1e-9)
    return RecoveryResult(noise_fraction, truth, det, hit)
