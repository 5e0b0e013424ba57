"""Fingerprint database with k-nearest-neighbour identification and localization."""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputError, NoMatchError, ParameterError
from .gait import FeatureRecord
from .signal import DEFAULT_RATE
from .similarity import DEFAULT_THR_PRUNE, FeatureSeq, Metric, PackedSeqs, distances_to_many

DEFAULT_WINDOW = 5.0
DEFAULT_STRIDE = 1.0


class LocateMode(enum.Enum):
    NEAREST = "nearest"
    WEIGHTED_CENTROID = "centroid"


@dataclass(frozen=True)
class Fingerprint:
    seq: FeatureSeq
    subject: str
    location: tuple[float, float]
    session: str = ""

    def __post_init__(self):
        if len(self.seq) < 1:
            raise InputError("fingerprint sequence is empty")
        if not all(math.isfinite(c) for c in self.location):
            raise InputError("fingerprint location must be finite")


@dataclass(frozen=True)
class FingerprintDb:
    entries: tuple[Fingerprint, ...]
    window_s: float = DEFAULT_WINDOW
    grid_rate: float = DEFAULT_RATE
    features: str = "slope"

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @cached_property
    def packed(self) -> PackedSeqs:
        return PackedSeqs.pack([fp.seq for fp in self.entries])


@dataclass(frozen=True)
class KnnConfig:
    k: int = 1
    metric: Metric = Metric.MODIFIED_DTW
    thr_prune: float = DEFAULT_THR_PRUNE
    locate_mode: LocateMode = LocateMode.NEAREST
    normalize: bool = False
    # Warping allowance named by the original algorithm but never used by it.
    weight: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "metric", Metric.parse(self.metric))
        if isinstance(self.locate_mode, str):
            object.__setattr__(self, "locate_mode", LocateMode(self.locate_mode))
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ParameterError(f"k must be a positive integer, got {self.k!r}")
        if not self.thr_prune > 0:
            raise ParameterError("thr_prune must be positive")


class Neighbor(NamedTuple):
    index: int
    distance: float


class Identification(NamedTuple):
    subject: str
    distances: list[float]
    neighbors: list[Neighbor]


@dataclass
class QueryStats:
    """Counters filled in by :func:`neighbors` when passed one."""

    evaluations: int = 0
    pruned: int = 0
    iterations: int = 0


def neighbors(query: FeatureSeq, db: FingerprintDb, cfg: KnnConfig, stats: QueryStats | None = None) -> list[Neighbor]:
    """The ``k`` closest entries, pruned ones excluded, ties broken by db order."""
    if not len(db):
        raise InputError("fingerprint database is empty")
    dists, iters = distances_to_many(query, db.packed, cfg.metric, cfg.thr_prune, cfg.normalize)
    pruned = np.isinf(dists)
    if stats is not None:
        stats.evaluations += dists.size
        stats.pruned += int(pruned.sum())
        stats.iterations += int(iters.sum())
    idx = np.flatnonzero(~pruned)
    if not idx.size:
        raise NoMatchError("every fingerprint was pruned by the head-posture check")
    # stable sort keeps db order among equal distances
    best = idx[np.argsort(dists[idx], kind="stable")[: cfg.k]]
    return [Neighbor(int(i), float(dists[i])) for i in best]


def vote(labels: Sequence[str], dists: Sequence[float]) -> str:
    """Majority label; ties go to the smallest summed distance, then first seen."""
    count: dict[str, int] = defaultdict(int)
    total: dict[str, float] = defaultdict(float)
    order: dict[str, int] = {}
    for pos, (lab, d) in enumerate(zip(labels, dists)):
        count[lab] += 1
        total[lab] += d
        order.setdefault(lab, pos)
    return min(count, key=lambda lab: (-count[lab], total[lab], order[lab]))


def identify(query: FeatureSeq, db: FingerprintDb, cfg: KnnConfig | None = None) -> Identification:
    cfg = cfg or KnnConfig()
    nbrs = neighbors(query, db, cfg)
    labels = [db.entries[n.index].subject for n in nbrs]
    dists = [n.distance for n in nbrs]
    return Identification(vote(labels, dists), dists, nbrs)


def locate_from(nbrs: Sequence[Neighbor], db: FingerprintDb, mode: LocateMode) -> tuple[float, float]:
    locs = [db.entries[n.index].location for n in nbrs]
    if mode is LocateMode.NEAREST:
        return locs[0]
    for n, loc in zip(nbrs, locs):
        if n.distance == 0.0:
            return loc
    w = np.array([1.0 / n.distance for n in nbrs])
    xy = np.array(locs, dtype=float)
    x, y = (w[:, None] * xy).sum(axis=0) / w.sum()
    return float(x), float(y)


def localize(query: FeatureSeq, db: FingerprintDb, cfg: KnnConfig | None = None) -> tuple[float, float]:
    """Nearest entry's location, or the inverse-distance-weighted centroid of the k nearest."""
    cfg = cfg or KnnConfig()
    return locate_from(neighbors(query, db, cfg), db, cfg.locate_mode)


def records_to_seq(records: Sequence[FeatureRecord]) -> FeatureSeq:
    values = np.array([r.vector() for r in records], dtype=float)
    postures = np.array([r.posture for r in records], dtype=float)
    return FeatureSeq(values, postures)


def _infer_rate(ts: np.ndarray) -> float:
    if ts.size < 2:
        return DEFAULT_RATE
    return 1.0 / float(np.median(np.diff(ts)))


def slice_windows(
    records: Sequence[FeatureRecord],
    window_s: float,
    stride_s: float,
    grid_rate: float | None = None,
) -> list[tuple[float, list[FeatureRecord]]]:
    """``(start, records)`` pairs of fixed-length windows.

    Window ``k`` starts at the first record at or after ``t0 + k * stride_s``
    and holds exactly ``ceil(window_s * rate)`` records, so every window of
    a database has the same length. Only windows whose time span
    ``[start, start + window_s)`` ends within the stream are kept; the
    stream is taken to extend one sample period past its last record.
    """
    if not window_s > 0 or not stride_s > 0:
        raise ParameterError("window and stride must be positive")
    if not records:
        return []
    ts = np.array([r.t for r in records])
    rate = grid_rate or _infer_rate(ts)
    n = window_points(window_s, rate)
    end = ts[-1] + 1.0 / rate
    eps = 1e-9
    out = []
    k = 0
    while True:
        start = ts[0] + k * stride_s
        if start + window_s > end + eps:
            break
        lo = int(np.searchsorted(ts, start - eps))
        if lo + n > len(records):
            break
        out.append((float(start), list(records[lo : lo + n])))
        k += 1
    return out


def window_points(window_s: float, rate: float) -> int:
    return int(math.ceil(window_s * rate - 1e-9))


def build_db(
    streams: Sequence[Sequence[FeatureRecord]],
    window_s: float = DEFAULT_WINDOW,
    stride_s: float = DEFAULT_STRIDE,
    grid_rate: float = DEFAULT_RATE,
    sessions: Sequence[str] | None = None,
    features: str = "slope",
) -> FingerprintDb:
    """Slice labeled record streams into fingerprints.

    The location of a window is the labeled position of the record nearest
    to the window's midpoint time.
    """
    if sessions is not None and len(sessions) != len(streams):
        raise InputError("one session label per stream is required")
    entries = []
    for s_idx, recs in enumerate(streams):
        session = sessions[s_idx] if sessions is not None else str(s_idx)
        for start, win in slice_windows(recs, window_s, stride_s, grid_rate):
            mid = start + window_s / 2
            ref = min(win, key=lambda r: abs(r.t - mid))
            if ref.subject is None or ref.location is None:
                raise InputError("build_db needs records labeled with subject and location")
            entries.append(Fingerprint(records_to_seq(win), ref.subject, ref.location, session))
    return FingerprintDb(tuple(entries), window_s, grid_rate, features)
