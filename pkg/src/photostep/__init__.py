"""Step counting, subject identification and indoor localization from
the voltages of solar cells mounted on shoes."""

from __future__ import annotations

from .errors import (
    AlignmentError,
    IncompatibleVersionError,
    InputError,
    MetricError,
    NoMatchError,
    ParameterError,
    ParseError,
    PhotostepError,
    RangeError,
    ShapeError,
)
from .gait import (
    FeatureRecord,
    Origin,
    PosturePoint,
    StepDetectorConfig,
    StepEvent,
    complement_missing,
    detect_both,
    detect_steps,
    interpolate_posture,
)
from .pipeline import PipelineConfig, feature_records, process
from .preprocess import DerivStream, derivative, low_pass
from .recognition import (
    Fingerprint,
    FingerprintDb,
    KnnConfig,
    LocateMode,
    build_db,
    identify,
    localize,
)
from .signal import CHANNELS, ChannelId, Foot, MultiStream, Placement, SampleStream, resample_align, window
from .similarity import FeatureSeq, Metric, dist_posture, dtw_full, dtw_modified, euclid_seq

__version__ = "0.1.0"

__all__ = [
    "annotations",
    "AlignmentError",
    "IncompatibleVersionError",
    "InputError",
    "MetricError",
    "NoMatchError",
    "ParameterError",
    "ParseError",
    "PhotostepError",
    "RangeError",
    "ShapeError",
    "FeatureRecord",
    "Origin",
    "PosturePoint",
    "StepDetectorConfig",
    "StepEvent",
    "complement_missing",
    "detect_both",
    "detect_steps",
    "interpolate_posture",
    "PipelineConfig",
    "feature_records",
    "process",
    "DerivStream",
    "derivative",
    "low_pass",
    "Fingerprint",
    "FingerprintDb",
    "KnnConfig",
    "LocateMode",
    "build_db",
    "identify",
    "localize",
    "CHANNELS",
    "ChannelId",
    "Foot",
    "MultiStream",
    "Placement",
    "SampleStream",
    "resample_align",
    "window",
    "FeatureSeq",
    "Metric",
    "dist_posture",
    "dtw_full",
    "dtw_modified",
    "euclid_seq",
]
