"""Metrics for step counting, identification, localization and similarity benchmarks.

Percentiles use the nearest-rank convention: the p-th percentile of ``n``
sorted values is the ``ceil(p/100 * n)``-th smallest (1-based).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import InputError, MetricError, NoMatchError
from .gait import StepEvent
from .recognition import Fingerprint, FingerprintDb, KnnConfig, QueryStats, neighbors, vote
from .similarity import Metric

CDF_RESOLUTION = 0.01  # metres
REPORT_PERCENTILES = (25, 50, 75, 80, 90, 95, 100)


# -- confusion -------------------------------------------------------------


def _label_key(lab):
    return (lab is None, type(lab).__name__, lab if lab is not None else 0)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true labels, columns predicted labels, both in ``labels`` order."""

    labels: tuple
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total if self.total else 0.0

    def within(self, band: float) -> float:
        """Fraction of queries whose numeric prediction is within ``band`` of the truth."""
        hit = 0
        for i, t in enumerate(self.labels):
            for j, p in enumerate(self.labels):
                if t is not None and p is not None and abs(p - t) <= band:
                    hit += self.counts[i, j]
        return hit / self.total if self.total else 0.0

    def row(self, label) -> np.ndarray:
        return self.counts[self.labels.index(label)]

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.counts, other.counts)

    __hash__ = None  # type: ignore[assignment]


def confusion(queries: Sequence[tuple[Hashable, Hashable]]) -> ConfusionMatrix:
    if not queries:
        raise InputError("confusion matrix needs at least one query")
    labels = tuple(sorted({t for t, _ in queries} | {p for _, p in queries}, key=_label_key))
    index = {lab: k for k, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in queries:
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(labels, counts)


# -- step counting ---------------------------------------------------------


@dataclass(frozen=True)
class StepMetrics:
    """Step-count errors in percent, averaged over traces.

    Standard deviations are population (``ddof=0``) deviations over traces.
    """

    relative_error_pct: float
    abs_error_pct: float
    relative_std: float
    abs_std: float
    counts: tuple[tuple[int, int], ...]  # (true, predicted) per trace
    confusion: ConfusionMatrix

    @property
    def per_trace_relative(self) -> list[float]:
        return [_rel(p, t) for t, p in self.counts]

    @property
    def per_trace_abs(self) -> list[float]:
        return [abs(_rel(p, t)) for t, p in self.counts]


def _rel(pred: int, truth: int) -> float:
    return (pred - truth) / truth * 100.0


def _counts(pred: Sequence[StepEvent], truth: Sequence[StepEvent]) -> tuple[int, int]:
    for seq in (pred, truth):
        for a, b in zip(seq, seq[1:]):
            if b.t < a.t:
                raise InputError("step events must be sorted by time")
    if not truth:
        raise MetricError("step error is undefined for an empty ground truth")
    return len(truth), len(pred)


def step_metrics_suite(traces: Sequence[tuple[Sequence[StepEvent], Sequence[StepEvent]]]) -> StepMetrics:
    """Aggregate over ``(predicted, truth)`` pairs, one per trace."""
    if not traces:
        raise InputError("no traces to score")
    counts = tuple(_counts(p, t) for p, t in traces)
    rel = np.array([_rel(p, t) for t, p in counts])
    ab = np.abs(rel)
    return StepMetrics(
        relative_error_pct=float(rel.mean()),
        abs_error_pct=float(ab.mean()),
        relative_std=float(rel.std()),
        abs_std=float(ab.std()),
        counts=counts,
        confusion=confusion(list(counts)),
    )


def step_metrics(pred: Sequence[StepEvent], truth: Sequence[StepEvent]) -> StepMetrics:
    return step_metrics_suite([(pred, truth)])


def match_steps(pred: Sequence[StepEvent], truth: Sequence[StepEvent], tol: float) -> int:
    """Ground-truth steps with a same-foot prediction within ``tol`` seconds.

    Greedy one-to-one matching in time order.
    """
    by_foot: dict = {}
    for e in pred:
        by_foot.setdefault(e.foot, []).append(e.t)
    used: dict = {f: np.zeros(len(ts), dtype=bool) for f, ts in by_foot.items()}
    arrs = {f: np.array(ts) for f, ts in by_foot.items()}
    hit = 0
    for e in truth:
        ts = arrs.get(e.foot)
        if ts is None or ts.size == 0:
            continue
        k = int(np.searchsorted(ts, e.t))
        best = None
        for c in (k - 1, k, k + 1):
            if 0 <= c < ts.size and not used[e.foot][c] and abs(ts[c] - e.t) <= tol:
                if best is None or abs(ts[c] - e.t) < abs(ts[best] - e.t):
                    best = c
        if best is not None:
            used[e.foot][best] = True
            hit += 1
    return hit


# -- localization ----------------------------------------------------------


def nearest_rank(sorted_vals: Sequence[float], p: float) -> float:
    n = len(sorted_vals)
    if n == 0:
        raise InputError("percentile of an empty sample")
    if not 0 <= p <= 100:
        raise InputError("percentile must lie in [0, 100]")
    rank = max(1, math.ceil(p / 100.0 * n - 1e-12))
    return float(sorted_vals[rank - 1])


@dataclass(frozen=True, eq=False)
class LocalizationReport:
    errors: np.ndarray
    median: float
    p80: float
    max: float
    percentiles: dict
    cdf_x: np.ndarray
    cdf_y: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, LocalizationReport):
            return NotImplemented
        return (
            np.array_equal(self.errors, other.errors)
            and self.percentiles == other.percentiles
            and np.array_equal(self.cdf_x, other.cdf_x)
            and np.array_equal(self.cdf_y, other.cdf_y)
        )

    __hash__ = None  # type: ignore[assignment]


def empirical_cdf(errors: np.ndarray, resolution: float = CDF_RESOLUTION) -> tuple[np.ndarray, np.ndarray]:
    """CDF sampled every ``resolution`` metres from 0 up to the first point >= max error."""
    srt = np.sort(errors)
    top = int(math.ceil(srt[-1] / resolution - 1e-9))
    x = np.arange(top + 1) * resolution
    if x[-1] < srt[-1]:
        x = np.append(x, (top + 1) * resolution)
    y = np.searchsorted(srt, x, side="right") / srt.size
    return x, y


def localization_report(pairs: Sequence[tuple[tuple[float, float], tuple[float, float]]]) -> LocalizationReport:
    """Errors between ``(estimated, true)`` positions."""
    if not pairs:
        raise InputError("no localization pairs")
    est = np.array([p[0] for p in pairs], dtype=float)
    tru = np.array([p[1] for p in pairs], dtype=float)
    errors = np.hypot(est[:, 0] - tru[:, 0], est[:, 1] - tru[:, 1])
    srt = np.sort(errors)
    pct = {p: nearest_rank(srt, p) for p in REPORT_PERCENTILES}
    x, y = empirical_cdf(errors)
    return LocalizationReport(errors, pct[50], pct[80], float(srt[-1]), pct, x, y)


# -- similarity benchmark --------------------------------------------------


@dataclass(frozen=True)
class BenchResult:
    method: Metric
    accuracy: float  # percent
    wall_time: float  # seconds
    iteration_counts: tuple[int, ...]
    n_queries: int
    no_match: int = 0
    predictions: tuple = ()

    @property
    def total_iterations(self) -> int:
        return sum(self.iteration_counts)


def bench_similarity(
    db: FingerprintDb,
    queries: Sequence[Fingerprint],
    methods: Sequence[Metric | str],
    cfg: KnnConfig | None = None,
    repeat: int = 1,
) -> list[BenchResult]:
    """Identification accuracy and single-threaded wall time per metric.

    ``repeat`` re-times the whole query set and keeps the fastest run.
    Iteration counts are reported for the posture-guided metric only.
    """
    if not methods:
        return []
    if not len(db) or not queries:
        raise InputError("benchmark needs a non-empty db and query set")
    base = cfg or KnnConfig()
    out = []
    for m in methods:
        mcfg = KnnConfig(base.k, Metric.parse(m), base.thr_prune, base.locate_mode, base.normalize)
        best = math.inf
        for _ in range(max(1, repeat)):
            preds = []
            iters = []
            no_match = 0
            t0 = time.perf_counter()
            for q in queries:
                stats = QueryStats()
                try:
                    nbrs = neighbors(q.seq, db, mcfg, stats)
                    preds.append(vote([db.entries[n.index].subject for n in nbrs], [n.distance for n in nbrs]))
                except NoMatchError:
                    preds.append(None)
                    no_match += 1
                iters.append(stats.iterations)
            best = min(best, time.perf_counter() - t0)
        correct = sum(p == q.subject for p, q in zip(preds, queries))
        out.append(
            BenchResult(
                method=mcfg.metric,
                accuracy=100.0 * correct / len(queries),
                wall_time=best,
                iteration_counts=tuple(iters) if mcfg.metric is Metric.MODIFIED_DTW else (),
                n_queries=len(queries),
                no_match=no_match,
                predictions=tuple(preds),
            )
        )
    return out
