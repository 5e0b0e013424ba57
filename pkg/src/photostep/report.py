"""Plain-text, NDJSON and CSV renderings of evaluation results."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from .evaluate import BenchResult, ConfusionMatrix, LocalizationReport, StepMetrics


def text_table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(h) for h in headers]] + [[_cell(v) for v in r] for r in rows]
    widths = [max(len(r[c]) for r in cells) for c in range(len(headers))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    return "none" if v is None else str(v)


def ndjson(records: Sequence[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def step_records(m: StepMetrics, label: str = "steps") -> list[dict]:
    recs = [
        {"kind": label, "trace": i, "true": t, "predicted": p, "relative_pct": (p - t) / t * 100.0}
        for i, (t, p) in enumerate(m.counts)
    ]
    recs.append(
        {
            "kind": f"{label}_summary",
            "traces": len(m.counts),
            "relative_pct": m.relative_error_pct,
            "relative_std": m.relative_std,
            "abs_pct": m.abs_error_pct,
            "abs_std": m.abs_std,
            "within_2": m.confusion.within(2),
        }
    )
    return recs


def step_table(m: StepMetrics) -> str:
    rows = [(i, t, p, (p - t) / t * 100.0) for i, (t, p) in enumerate(m.counts)]
    out = text_table(("trace", "true", "predicted", "error %"), rows)
    out += f"mean error {m.relative_error_pct:.3f}% +- {m.relative_std:.3f}, "
    out += f"mean |error| {m.abs_error_pct:.3f}% +- {m.abs_std:.3f}\n"
    return out


def confusion_table(cm: ConfusionMatrix) -> str:
    names = ["none" if lab is None else str(lab) for lab in cm.labels]
    rows = [[names[i]] + [int(c) for c in cm.counts[i]] for i in range(len(names))]
    return text_table(["true\\pred"] + names, rows) + f"accuracy {100 * cm.accuracy:.2f}%\n"


def localization_records(rep: LocalizationReport, label: str = "") -> list[dict]:
    rec = {"kind": "localization", "n": int(rep.errors.size), "median_m": rep.median, "p80_m": rep.p80, "max_m": rep.max}
    rec.update({f"p{p}_m": v for p, v in rep.percentiles.items()})
    if label:
        rec["label"] = label
    return [rec]


def cdf_csv(reports: dict[str, LocalizationReport]) -> str:
    """Long-format CDF: one ``label,error_m,cdf`` row per sample point."""
    lines = ["label,error_m,cdf"]
    for name, rep in reports.items():
        for x, y in zip(rep.cdf_x, rep.cdf_y):
            lines.append(f"{name},{x:.2f},{y:.17g}")
    return "\n".join(lines) + "\n"


def bench_records(results: Sequence[BenchResult]) -> list[dict]:
    return [
        {
            "kind": "bench",
            "method": r.method.value,
            "accuracy_pct": r.accuracy,
            "wall_time_s": r.wall_time,
            "iterations": r.total_iterations,
            "queries": r.n_queries,
            "no_match": r.no_match,
        }
        for r in results
    ]


def bench_table(results: Sequence[BenchResult]) -> str:
    rows = [(r.method.value, r.accuracy, r.wall_time, r.total_iterations, r.n_queries, r.no_match) for r in results]
    return text_table(("method", "accuracy %", "wall s", "iterations", "queries", "no match"), rows)


def write(path, text: str) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8", newline="")
    return path
