"""Sequence distances: pointwise Euclidean, full DTW and posture-guided DTW.

The posture-guided variant builds a single warp path greedily. From the
current cell it steps diagonally, down or right, whichever successor has
the closest foot postures, so it visits at most ``len(a) + len(b) - 1``
cells instead of filling the full cost matrix.

All distances are plain floats. ``math.inf`` is reserved as the explicit
"pruned" result and never produced by arithmetic overflow on finite input.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numba as nb
import numpy as np

from .errors import InputError, ShapeError

PRUNED = math.inf
DEFAULT_THR_PRUNE = 0.1


class Metric(enum.Enum):
    EUCLIDEAN = "euclid"
    FULL_DTW = "dtw"
    MODIFIED_DTW = "mdtw"

    @classmethod
    def parse(cls, s: "str | Metric") -> "Metric":
        if isinstance(s, Metric):
            return s
        for m in cls:
            if s.lower() in (m.value, m.name.lower()):
                return m
        raise InputError(f"unknown metric {s!r}; expected one of euclid, dtw, mdtw")


@dataclass(frozen=True, eq=False)
class FeatureSeq:
    """``n`` feature vectors of dimension ``d`` with an optional posture per vector."""

    values: np.ndarray
    postures: np.ndarray | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InputError(f"values must be a non-empty (n, d) array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("feature values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.postures is not None:
            p = np.ascontiguousarray(self.postures, dtype=np.float64)
            if p.shape != (v.shape[0],):
                raise InputError(f"{p.size} postures for {v.shape[0]} values")
            if not np.all((p >= 0) & (p < 2)):
                raise InputError("postures must lie in [0, 2)")
            p.setflags(write=False)
            object.__setattr__(self, "postures", p)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureSeq):
            return NotImplemented
        if (self.postures is None) != (other.postures is None):
            return False
        same_p = self.postures is None or np.array_equal(self.postures, other.postures)
        return same_p and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


class ModifiedResult(NamedTuple):
    distance: float
    iterations: int
    path_length: int


def dist_posture(a: float, b: float) -> float:
    """Cyclic distance on the 0-2 posture scale, in ``[0, 1]``."""
    d = abs(a - b)
    return min(d, 2.0 - d)


@nb.njit(cache=True)
def _dposture(a, b):
    d = abs(a - b)
    return d if d < 2.0 - d else 2.0 - d


@nb.njit(cache=True)
def _point(a, b, i, j):
    acc = 0.0
    for k in range(a.shape[1]):
        diff = a[i, k] - b[j, k]
        acc += diff * diff
    return math.sqrt(acc)


@nb.njit(cache=True)
def _dtw_full_kernel(a, b):
    n, m = a.shape[0], b.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    prev[0] = _point(a, b, 0, 0)
    for j in range(1, m):
        prev[j] = _point(a, b, 0, j) + prev[j - 1]
    for i in range(1, n):
        cur[0] = _point(a, b, i, 0) + prev[0]
        for j in range(1, m):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = _point(a, b, i, j) + best
        prev, cur = cur, prev
    return prev[m - 1]


@nb.njit(cache=True)
def _dtw_modified_kernel(a, b, pa, pb, thr_prune, path):
    """Greedy posture-guided warp path; returns (distance, iterations).

    ``path`` is either empty or an (n+m, 2) buffer that receives the visited
    cells; unused rows are left untouched.
    """
    n, m = a.shape[0], b.shape[0]
    if _dposture(pa[0], pb[0]) > thr_prune:
        return np.inf, 0
    record = path.shape[0] > 0
    i = 0
    j = 0
    dist = 0.0
    it = 0
    while i + 1 < n and j + 1 < m:
        dist += _point(a, b, i, j)
        if record:
            path[it, 0] = i
            path[it, 1] = j
        it += 1
        c_diag = _dposture(pa[i + 1], pb[j + 1])
        c_down = _dposture(pa[i + 1], pb[j])
        c_right = _dposture(pa[i], pb[j + 1])
        # ties prefer the diagonal, then down
        if c_diag <= c_down and c_diag <= c_right:
            i += 1
            j += 1
        elif c_down <= c_right:
            i += 1
        else:
            j += 1
    # one sequence is on its last element: walk the other to its end
    while True:
        dist += _point(a, b, i, j)
        if record:
            path[it, 0] = i
            path[it, 1] = j
        it += 1
        if i + 1 < n:
            i += 1
        elif j + 1 < m:
            j += 1
        else:
            break
    return dist, it


def _check_pair(a: FeatureSeq, b: FeatureSeq) -> None:
    if a.dim != b.dim:
        raise ShapeError(f"feature dimensions differ: {a.dim} vs {b.dim}")


def euclid_seq(a: FeatureSeq, b: FeatureSeq) -> float:
    """Sum of pointwise Euclidean distances; lengths must match."""
    _check_pair(a, b)
    if len(a) != len(b):
        raise ShapeError(f"Euclidean distance needs equal lengths, got {len(a)} and {len(b)}")
    diff = a.values - b.values
    return float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).sum())


def dtw_full(a: FeatureSeq, b: FeatureSeq) -> float:
    """Exact DTW by dynamic programming, O(len(a) * len(b))."""
    _check_pair(a, b)
    return float(_dtw_full_kernel(a.values, b.values))


_NO_PATH = np.empty((0, 2), dtype=np.int64)


def _postures(s: FeatureSeq, name: str) -> np.ndarray:
    if s.postures is None:
        raise InputError(f"{name} has no postures; modified DTW needs them")
    return s.postures


def dtw_modified_detail(
    a: FeatureSeq,
    b: FeatureSeq,
    thr_prune: float = DEFAULT_THR_PRUNE,
    normalize: bool = False,
) -> ModifiedResult:
    """Posture-guided DTW plus its iteration count.

    Returns ``PRUNED`` when the two head postures differ by more than
    ``thr_prune``. With ``normalize`` the sum is divided by the path length.
    """
    _check_pair(a, b)
    pa, pb = _postures(a, "first sequence"), _postures(b, "second sequence")
    dist, it = _dtw_modified_kernel(a.values, b.values, pa, pb, float(thr_prune), _NO_PATH)
    if math.isinf(dist):
        return ModifiedResult(PRUNED, 0, 0)
    if normalize:
        dist /= it
    return ModifiedResult(float(dist), int(it), int(it))


def dtw_modified(
    a: FeatureSeq,
    b: FeatureSeq,
    thr_prune: float = DEFAULT_THR_PRUNE,
    normalize: bool = False,
) -> float:
    return dtw_modified_detail(a, b, thr_prune, normalize).distance


def modified_path(a: FeatureSeq, b: FeatureSeq, thr_prune: float = DEFAULT_THR_PRUNE) -> np.ndarray | None:
    """Cells ``(i, j)`` visited by the greedy path, or ``None`` if pruned."""
    _check_pair(a, b)
    pa, pb = _postures(a, "first sequence"), _postures(b, "second sequence")
    buf = np.full((len(a) + len(b), 2), -1, dtype=np.int64)
    dist, it = _dtw_modified_kernel(a.values, b.values, pa, pb, float(thr_prune), buf)
    if math.isinf(dist):
        return None
    return buf[:it].copy()


@dataclass(frozen=True, eq=False)
class PackedSeqs:
    """Many sequences of one dimension stored end to end for batch kernels."""

    values: np.ndarray
    postures: np.ndarray | None
    offsets: np.ndarray

    @classmethod
    def pack(cls, seqs: "list[FeatureSeq]") -> "PackedSeqs":
        if not seqs:
            return cls(np.empty((0, 1)), None, np.zeros(1, dtype=np.int64))
        dims = {s.dim for s in seqs}
        if len(dims) != 1:
            raise ShapeError(f"mixed feature dimensions {sorted(dims)}")
        offsets = np.zeros(len(seqs) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([len(s) for s in seqs])
        values = np.ascontiguousarray(np.concatenate([s.values for s in seqs]))
        postures = None
        if all(s.postures is not None for s in seqs):
            postures = np.ascontiguousarray(np.concatenate([s.postures for s in seqs]))
        return cls(values, postures, offsets)

    def __len__(self) -> int:
        return self.offsets.size - 1


@nb.njit(cache=True)
def _modified_batch(a, pa, vals, posts, offsets, thr_prune, out_d, out_it, no_path):
    for k in range(offsets.size - 1):
        lo, hi = offsets[k], offsets[k + 1]
        d, it = _dtw_modified_kernel(a, vals[lo:hi], pa, posts[lo:hi], thr_prune, no_path)
        out_d[k] = d
        out_it[k] = it


@nb.njit(cache=True)
def _full_batch(a, vals, offsets, out_d):
    for k in range(offsets.size - 1):
        out_d[k] = _dtw_full_kernel(a, vals[offsets[k] : offsets[k + 1]])


def distances_to_many(
    query: FeatureSeq,
    packed: PackedSeqs,
    metric: Metric,
    thr_prune: float = DEFAULT_THR_PRUNE,
    normalize: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Distances from ``query`` to every packed sequence, plus modified-DTW iteration counts.

    Equal, entry by entry, to calling :func:`distance` in a loop.
    """
    metric = Metric.parse(metric)
    n = len(packed)
    out_d = np.empty(n)
    out_it = np.zeros(n, dtype=np.int64)
    if n == 0:
        return out_d, out_it
    if packed.values.shape[1] != query.dim:
        raise ShapeError(f"feature dimensions differ: {query.dim} vs {packed.values.shape[1]}")
    if metric is Metric.MODIFIED_DTW:
        pa = _postures(query, "query")
        if packed.postures is None:
            raise InputError("packed sequences have no postures; modified DTW needs them")
        _modified_batch(query.values, pa, packed.values, packed.postures, packed.offsets, float(thr_prune), out_d, out_it, _NO_PATH)
        if normalize:
            ok = out_it > 0
            out_d[ok] = out_d[ok] / out_it[ok]
    elif metric is Metric.FULL_DTW:
        _full_batch(query.values, packed.values, packed.offsets, out_d)
    else:
        lengths = np.diff(packed.offsets)
        if np.any(lengths != len(query)):
            bad = int(lengths[lengths != len(query)][0])
            raise ShapeError(f"Euclidean distance needs equal lengths, got {len(query)} and {bad}")
        diff = packed.values.reshape(n, len(query), -1) - query.values[None]
        out_d[:] = np.sqrt(np.einsum("kij,kij->ki", diff, diff)).sum(axis=1)
    return out_d, out_it


def distance(a: FeatureSeq, b: FeatureSeq, metric: Metric, thr_prune: float = DEFAULT_THR_PRUNE, normalize: bool = False) -> float:
    metric = Metric.parse(metric)
    if metric is Metric.EUCLIDEAN:
        return euclid_seq(a, b)
    if metric is Metric.FULL_DTW:
        return dtw_full(a, b)
    return dtw_modified(a, b, thr_prune, normalize)
