"""End-to-end processing: aligned voltages to steps and feature records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ParameterError
from .gait import (
    FeatureRecord,
    PosturePoint,
    StepDetectorConfig,
    StepEvent,
    alternating_runs,
    assemble_features,
    complement_missing,
    detect_both,
    interpolate_posture,
)
from .preprocess import DEFAULT_ALPHA, DerivStream, derivative, low_pass
from .signal import MultiStream

FEATURE_KINDS = ("slope", "level")


@dataclass(frozen=True)
class PipelineConfig:
    alpha: float = DEFAULT_ALPHA
    detector: StepDetectorConfig = field(default_factory=StepDetectorConfig)
    complement: bool = True
    # "slope" (derivative) suits identification, "level" suits localization
    features: str = "slope"

    def __post_init__(self):
        if self.features not in FEATURE_KINDS:
            raise ParameterError(f"features must be one of {FEATURE_KINDS}, got {self.features!r}")


@dataclass(frozen=True)
class Processed:
    smoothed: MultiStream
    deriv: DerivStream
    detected: list[StepEvent]
    steps: list[StepEvent]


def process(ms: MultiStream, cfg: PipelineConfig | None = None) -> Processed:
    cfg = cfg or PipelineConfig()
    smoothed = low_pass(ms, cfg.alpha)
    deriv = derivative(smoothed)
    detected = detect_both(deriv, cfg.detector)
    steps = complement_missing(detected, cfg.detector.t_thr) if cfg.complement else list(detected)
    return Processed(smoothed, deriv, detected, steps)


def postures_for(steps: Sequence[StepEvent], t_interval: float) -> list[PosturePoint]:
    """Posture points over every alternating run of steps.

    Same-foot repeats that survive complementing (gaps of ``t_thr`` or
    more) break the posture cycle; each run is interpolated on its own.
    """
    out: list[PosturePoint] = []
    for run in alternating_runs(steps):
        out.extend(interpolate_posture(run, t_interval))
    return out


def feature_records(
    ms: MultiStream,
    cfg: PipelineConfig | None = None,
    subject: str | None = None,
    track: Callable[[float], tuple[float, float]] | None = None,
    processed: Processed | None = None,
) -> list[FeatureRecord]:
    cfg = cfg or PipelineConfig()
    proc = processed or process(ms, cfg)
    source = proc.deriv if cfg.features == "slope" else proc.smoothed
    lo, hi = source.t[0], source.t[-1]
    points = [p for p in postures_for(proc.steps, 1.0 / ms.grid_rate) if lo <= p.t <= hi]
    return assemble_features(source, points, subject, track)
