"""Report figures rendered to PNG with the Agg backend.

PNG metadata is pinned so the same data always produces the same bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluate import BenchResult, ConfusionMatrix, LocalizationReport  # noqa: E402
from .gait import StepEvent  # noqa: E402
from .signal import MultiStream  # noqa: E402

_META = {"Software": None, "Creation Time": None}

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="png", metadata=_META)
    plt.close(fig)
    return path


def plot_confusion(cm: ConfusionMatrix, path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.grid(False)
        ax.imshow(cm.counts, cmap="Blues")
        names = ["none" if lab is None else str(lab) for lab in cm.labels]
        ax.set_xticks(range(len(names)), names, rotation=90 if len(names) > 12 else 0)
        ax.set_yticks(range(len(names)), names)
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        if len(names) <= 12:
            hi = cm.counts.max() if cm.counts.size else 0
            for i in range(len(names)):
                for j in range(len(names)):
                    c = cm.counts[i, j]
                    if c:
                        ax.text(j, i, str(c), ha="center", va="center", color="white" if c > hi / 2 else "black")
        ax.set_title(title or f"accuracy {100 * cm.accuracy:.1f}%")
        return _save(fig, path)


def plot_cdf(reports: dict[str, LocalizationReport], path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, rep in reports.items():
            ax.step(rep.cdf_x, rep.cdf_y, where="post", label=f"{name} (median {rep.median:.2f} m)")
        ax.set_xlabel("error (m)")
        ax.set_ylabel("CDF")
        ax.set_ylim(0, 1.02)
        ax.legend(loc="lower right")
        return _save(fig, path)


def plot_bench(results: Sequence[BenchResult], path) -> Path:
    with plt.rc_context(STYLE):
        fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.5))
        names = [r.method.value for r in results]
        a1.bar(names, [r.accuracy for r in results], color="tab:blue")
        a1.set_ylabel("accuracy (%)")
        a1.set_ylim(0, 100)
        a2.bar(names, [r.wall_time for r in results], color="tab:orange")
        a2.set_ylabel("wall time (s)")
        a2.set_yscale("log")
        return _save(fig, path)


def plot_window_sweep(rows: Sequence[tuple[float, float]], path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xs = [r[0] for r in rows]
        ax.plot(xs, [r[1] for r in rows], "o-")
        ax.set_xscale("log")
        ax.set_xticks(xs, [f"{x:g}" for x in xs])
        ax.set_xlabel("window length (s)")
        ax.set_ylabel("median error (m)")
        return _save(fig, path)


def plot_trace(ms: MultiStream, steps: Sequence[StepEvent], path, truth: Sequence[StepEvent] = ()) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(8, 3.5))
        for ch in ms.channels:
            ax.plot(ms.t, ms[ch], lw=0.8, label=ch.code)
        lo, hi = (float(np.min(ms.matrix())), float(np.max(ms.matrix()))) if len(ms) else (0.0, 1.0)
        for e in truth:
            ax.axvline(e.t, color="0.7", lw=0.6, ls=":")
        for e in steps:
            ax.plot([e.t], [hi], "v", color="tab:red" if e.foot.value == "R" else "tab:green", ms=4)
        ax.set_ylim(lo - 0.05 * (hi - lo + 1e-9), hi + 0.1 * (hi - lo + 1e-9))
        ax.set_xlabel("time (s)")
        ax.set_ylabel(ms.units)
        ax.legend(ncol=4, loc="lower right")
        return _save(fig, path)
