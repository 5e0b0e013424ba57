"""Time-series containers, multichannel alignment and windowing.

Each shoe carries two photovoltaic cells (top-center and outer-side), so a
recording has four channels. Raw channels are sampled independently and are
first put on a shared uniform grid with :func:`resample_align`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import AlignmentError, InputError, ParameterError, RangeError

DEFAULT_RATE = 28.0

# Grid arithmetic tolerance, in units of grid steps.
_GRID_EPS = 1e-9


class Foot(enum.Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def opposite(self) -> "Foot":
        return Foot.RIGHT if self is Foot.LEFT else Foot.LEFT


class Placement(enum.Enum):
    TOP = "top"
    SIDE = "side"


@dataclass(frozen=True)
class ChannelId:
    foot: Foot
    placement: Placement

    @property
    def code(self) -> str:
        """Two-letter file column name, e.g. ``lt`` for left/top."""
        return self.foot.value.lower() + self.placement.value[0]

    @classmethod
    def from_code(cls, code: str) -> "ChannelId":
        for ch in CHANNELS:
            if ch.code == code:
                return ch
        raise InputError(f"unknown channel code {code!r}")

    def __lt__(self, other: "ChannelId") -> bool:
        # file column order
        return CHANNELS.index(self) < CHANNELS.index(other)

    def __repr__(self) -> str:
        return f"ChannelId({self.code})"


LT = ChannelId(Foot.LEFT, Placement.TOP)
LS = ChannelId(Foot.LEFT, Placement.SIDE)
RT = ChannelId(Foot.RIGHT, Placement.TOP)
RS = ChannelId(Foot.RIGHT, Placement.SIDE)
#: Canonical channel order, shared by files and feature vectors.
CHANNELS: tuple[ChannelId, ...] = (LT, LS, RT, RS)


class Sample(NamedTuple):
    t: float
    v: float


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampleStream:
    """Raw readings of one channel.

    Timestamps are seconds and must be strictly increasing.
    """

    channel: ChannelId
    t: np.ndarray
    v: np.ndarray
    nominal_rate: float = DEFAULT_RATE

    def __post_init__(self):
        t = _frozen(self.t)
        v = _frozen(self.v)
        if t.ndim != 1 or t.shape != v.shape:
            raise InputError("t and v must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise InputError(f"{self.channel}: non-finite sample")
        if t.size and t[0] < 0:
            raise InputError(f"{self.channel}: negative timestamp")
        if np.any(np.diff(t) <= 0):
            raise InputError(f"{self.channel}: timestamps not strictly increasing")
        if not self.nominal_rate > 0:
            raise ParameterError("nominal_rate must be positive")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    def __len__(self) -> int:
        return self.t.size

    @property
    def samples(self) -> list[Sample]:
        return [Sample(float(a), float(b)) for a, b in zip(self.t, self.v)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleStream):
            return NotImplemented
        return (
            self.channel == other.channel
            and self.nominal_rate == other.nominal_rate
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.v, other.v)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class MultiStream:
    """Several channels sharing one uniform time grid.

    ``t[k] == t[0] + k / grid_rate`` for every grid index ``k``.
    """

    t: np.ndarray
    values: Mapping[ChannelId, np.ndarray]
    grid_rate: float
    units: str = "V"
    _order: tuple = field(init=False, repr=False, default=())

    def __post_init__(self):
        t = _frozen(self.t)
        if not self.grid_rate > 0:
            raise ParameterError("grid_rate must be positive")
        vals = {}
        for ch, v in self.values.items():
            arr = _frozen(v)
            if arr.shape != t.shape:
                raise InputError(f"{ch}: length {arr.size} != grid length {t.size}")
            vals[ch] = arr
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", dict(sorted(vals.items())))
        object.__setattr__(self, "_order", tuple(sorted(vals)))

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, ch: ChannelId) -> np.ndarray:
        return self.values[ch]

    def __iter__(self) -> Iterator[ChannelId]:
        return iter(self._order)

    @property
    def channels(self) -> tuple[ChannelId, ...]:
        return self._order

    @property
    def dt(self) -> float:
        return 1.0 / self.grid_rate

    @property
    def duration(self) -> float:
        """Span covered by the grid, one grid step per point."""
        return len(self) / self.grid_rate

    def stream(self, ch: ChannelId) -> SampleStream:
        return SampleStream(ch, self.t, self.values[ch], self.grid_rate)

    def matrix(self, channels: Sequence[ChannelId] | None = None) -> np.ndarray:
        """Values as an ``(n, d)`` array in canonical channel order."""
        chans = self._order if channels is None else tuple(channels)
        if not chans:
            return np.empty((len(self), 0))
        return np.column_stack([self.values[c] for c in chans])

    def replace_values(self, values: Mapping[ChannelId, np.ndarray], units: str | None = None):
        return type(self)(self.t, values, self.grid_rate, self.units if units is None else units)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiStream):
            return NotImplemented
        return (
            self.grid_rate == other.grid_rate
            and self._order == other._order
            and np.array_equal(self.t, other.t)
            and all(np.array_equal(self.values[c], other.values[c]) for c in self._order)
        )

    __hash__ = None  # type: ignore[assignment]


def uniform_grid(start: float, stop: float, rate: float) -> np.ndarray:
    """Grid points ``start + k/rate`` that do not exceed ``stop``."""
    n = int(math.floor((stop - start) * rate + _GRID_EPS)) + 1
    return start + np.arange(n) / rate


def resample_align(streams: Sequence[SampleStream], grid_rate: float = DEFAULT_RATE) -> MultiStream:
    """Linearly interpolate every stream onto one uniform grid.

    The grid starts at the latest first-sample time and stops at or before
    the earliest last-sample time, so no channel is ever extrapolated.
    """
    if not grid_rate > 0:
        raise ParameterError("grid_rate must be positive")
    if not streams:
        raise InputError("no streams to align")
    seen = set()
    for s in streams:
        if len(s) < 2:
            raise InputError(f"{s.channel}: need at least 2 samples, got {len(s)}")
        if s.channel in seen:
            raise InputError(f"duplicate channel {s.channel}")
        seen.add(s.channel)
    start = max(float(s.t[0]) for s in streams)
    stop = min(float(s.t[-1]) for s in streams)
    if start > stop:
        raise AlignmentError(f"streams do not overlap (latest start {start} > earliest end {stop})")
    grid = uniform_grid(start, stop, grid_rate)
    # rounding can push the final point a hair past ``stop``; np.interp clamps there
    values = {s.channel: np.interp(grid, s.t, s.v) for s in streams}
    return MultiStream(grid, values, grid_rate)


def _window_bounds(n: int, rate: float, start: float, length: float) -> tuple[int, int]:
    if not length > 0:
        raise ParameterError("window length must be positive")
    if start < 0:
        raise RangeError(f"window start {start} before grid origin")
    i0 = int(math.ceil(start * rate - _GRID_EPS))
    count = int(math.ceil(length * rate - _GRID_EPS))
    if i0 >= n or i0 + count > n:
        raise RangeError(
            f"window [{start}, {start + length}) exceeds grid span {n / rate} s"
        )
    return i0, i0 + count


def window(ms: MultiStream, start: float, length: float) -> MultiStream:
    """Contiguous sub-grid covering ``[start, start + length)``.

    ``start`` is measured from the grid origin ``ms.t[0]`` and snaps up to
    the next grid point; the window then holds ``ceil(length * rate)``
    points, so a 5 s window at 28 Hz has 140 points.
    """
    i0, i1 = _window_bounds(len(ms), ms.grid_rate, start, length)
    return type(ms)(ms.t[i0:i1], {c: v[i0:i1] for c, v in ms.values.items()}, ms.grid_rate, ms.units)
