"""Smoothing and differentiation of aligned voltage streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import InputError, ParameterError
from .signal import MultiStream

DEFAULT_ALPHA = 0.3


@dataclass(frozen=True)
class FilterParams:
    alpha: float = DEFAULT_ALPHA
    dt: float = 1.0 / 28.0

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.dt > 0:
            raise ParameterError("dt must be positive")


class DerivStream(MultiStream):
    """Rate of change (V/s) of a stream; its grid drops the source's first point."""


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha}")


def ema(v: np.ndarray, alpha: float) -> np.ndarray:
    """``V[0] = v[0]``, ``V[i] = alpha*V[i-1] + (1-alpha)*v[i]``."""
    _check_alpha(alpha)
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise InputError("cannot filter an empty channel")
    # seeding the delay line with alpha*v[0] makes V[0] == v[0]
    out, _ = lfilter([1.0 - alpha], [1.0, -alpha], v, zi=[alpha * v[0]])
    return out


def low_pass(ms: MultiStream, alpha: float = DEFAULT_ALPHA) -> MultiStream:
    _check_alpha(alpha)
    return ms.replace_values({c: ema(v, alpha) for c, v in ms.values.items()})


def derivative(ms: MultiStream) -> DerivStream:
    """Backward difference ``(V[i] - V[i-1]) / dt`` on the stream's grid."""
    if len(ms) < 2:
        raise InputError(f"derivative needs at least 2 grid points, got {len(ms)}")
    vals = {c: np.diff(v) / ms.dt for c, v in ms.values.items()}
    return DerivStream(ms.t[1:], vals, ms.grid_rate, units=f"{ms.units}/s")
