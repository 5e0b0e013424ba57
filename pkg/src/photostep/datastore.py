"""Line-oriented file formats.

Samples: CSV with header ``t_ms,lt,ls,rt,rs``, integer milliseconds and
voltages printed with 17 significant digits.

Step events: CSV with header ``t,foot,origin``; times in seconds.

Ground truth: NDJSON. The first line is a header, then one line per step
and one per track knot.

Fingerprint db: NDJSON. The first line is a header with the format
version and window settings; each further line is one fingerprint.

Every float is written with ``.17g`` so reading a written file gives back
exactly the same values.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import IncompatibleVersionError, InputError, ParseError
from .gait import Origin, StepEvent
from .recognition import Fingerprint, FingerprintDb
from .signal import CHANNELS, DEFAULT_RATE, Foot, SampleStream
from .simulate import GroundTruth, Track
from .similarity import FeatureSeq

SAMPLES_HEADER = ("t_ms",) + tuple(c.code for c in CHANNELS)
STEPS_HEADER = ("t", "foot", "origin")
DB_FORMAT = "photostep-db"
DB_VERSION = 1
TRUTH_FORMAT = "photostep-truth"
TRUTH_VERSION = 1


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _float(s: str, line: int, path) -> float:
    try:
        v = float(s)
    except ValueError:
        raise ParseError(f"not a number: {s!r}", line, path) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {s!r}", line, path)
    return v


def _write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="")


def _read_lines(path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc}", None, path) from None
    return text.splitlines()


# -- samples ---------------------------------------------------------------


def samples_text(streams: Sequence[SampleStream]) -> str:
    by_ch = {s.channel: s for s in streams}
    if set(by_ch) != set(CHANNELS) or len(streams) != len(CHANNELS):
        raise InputError("a samples file needs exactly the four channels lt, ls, rt, rs")
    t = by_ch[CHANNELS[0]].t
    for s in streams:
        if not np.array_equal(s.t, t):
            raise InputError("all channels must share the same sample times")
    t_ms = np.round(t * 1000.0)
    if not np.allclose(t_ms / 1000.0, t, rtol=0, atol=1e-9):
        raise InputError("sample times must fall on whole milliseconds")
    buf = io.StringIO()
    buf.write(",".join(SAMPLES_HEADER) + "\n")
    cols = [by_ch[c].v for c in CHANNELS]
    for k in range(t.size):
        buf.write(str(int(t_ms[k])) + "," + ",".join(fmt(col[k]) for col in cols) + "\n")
    return buf.getvalue()


def write_samples(path, streams: Sequence[SampleStream]) -> None:
    _write_text(path, samples_text(streams))


def read_samples(path, nominal_rate: float = DEFAULT_RATE) -> list[SampleStream]:
    """Four streams in ``lt, ls, rt, rs`` order."""
    lines = _read_lines(path)
    if not lines or tuple(h.strip() for h in lines[0].split(",")) != SAMPLES_HEADER:
        raise ParseError(f"missing header {','.join(SAMPLES_HEADER)}", 1, path)
    t_ms: list[int] = []
    cols: list[list[float]] = [[] for _ in CHANNELS]
    for ln, row in enumerate(csv.reader(lines[1:]), start=2):
        if not row:
            continue
        if len(row) != len(SAMPLES_HEADER):
            raise ParseError(f"expected {len(SAMPLES_HEADER)} fields, got {len(row)}", ln, path)
        try:
            tm = int(row[0])
        except ValueError:
            raise ParseError(f"t_ms is not an integer: {row[0]!r}", ln, path) from None
        if tm < 0:
            raise ParseError("negative t_ms", ln, path)
        if t_ms and tm <= t_ms[-1]:
            raise ParseError(f"t_ms {tm} not after {t_ms[-1]}", ln, path)
        t_ms.append(tm)
        for col, s in zip(cols, row[1:]):
            col.append(_float(s, ln, path))
    t = np.array(t_ms, dtype=float) / 1000.0
    return [SampleStream(ch, t, np.array(col), nominal_rate) for ch, col in zip(CHANNELS, cols)]


# -- step events -----------------------------------------------------------


def steps_text(events: Sequence[StepEvent]) -> str:
    buf = io.StringIO()
    buf.write(",".join(STEPS_HEADER) + "\n")
    for e in events:
        buf.write(f"{fmt(e.t)},{e.foot.value},{e.origin.value}\n")
    return buf.getvalue()


def write_steps(path, events: Sequence[StepEvent]) -> None:
    _write_text(path, steps_text(events))


def read_steps(path) -> list[StepEvent]:
    lines = _read_lines(path)
    if not lines or tuple(h.strip() for h in lines[0].split(",")) != STEPS_HEADER:
        raise ParseError(f"missing header {','.join(STEPS_HEADER)}", 1, path)
    out = []
    for ln, row in enumerate(csv.reader(lines[1:]), start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", ln, path)
        try:
            foot, origin = Foot(row[1]), Origin(row[2])
        except ValueError as exc:
            raise ParseError(str(exc), ln, path) from None
        out.append(StepEvent(_float(row[0], ln, path), foot, origin))
    return out


# -- ground truth ----------------------------------------------------------


def truth_text(truth: GroundTruth) -> str:
    lines = [
        json.dumps(
            {"format": TRUTH_FORMAT, "version": TRUTH_VERSION, "subject": truth.subject, "duration": fmt(truth.duration)}
        )
    ]
    for e in truth.steps:
        lines.append(json.dumps({"step": {"t": fmt(e.t), "foot": e.foot.value, "origin": e.origin.value}}))
    for t, x, y in zip(truth.track.t, truth.track.x, truth.track.y):
        lines.append(json.dumps({"knot": [fmt(t), fmt(x), fmt(y)]}))
    return "\n".join(lines) + "\n"


def write_truth(path, truth: GroundTruth) -> None:
    _write_text(path, truth_text(truth))


def _json_lines(path) -> list[tuple[int, dict]]:
    out = []
    for ln, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", ln, path) from None
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", ln, path)
        out.append((ln, obj))
    if not out:
        raise ParseError("empty file", 1, path)
    return out


def _check_header(ln: int, head: dict, fmt_name: str, version: int, path) -> None:
    if head.get("format") != fmt_name:
        raise ParseError(f"not a {fmt_name} file", ln, path)
    if head.get("version") != version:
        raise IncompatibleVersionError(f"unsupported {fmt_name} version {head.get('version')!r}, expected {version}", ln, path)


def read_truth(path) -> GroundTruth:
    rows = _json_lines(path)
    ln, head = rows[0]
    _check_header(ln, head, TRUTH_FORMAT, TRUTH_VERSION, path)
    steps = []
    knots = []
    try:
        subject = str(head["subject"])
        duration = _float(head["duration"], ln, path)
        for ln, obj in rows[1:]:
            if "step" in obj:
                s = obj["step"]
                steps.append(StepEvent(_float(s["t"], ln, path), Foot(s["foot"]), Origin(s["origin"])))
            elif "knot" in obj:
                knots.append([_float(v, ln, path) for v in obj["knot"]])
            else:
                raise ParseError("unknown record", ln, path)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed record: {exc}", ln, path) from None
    if not knots:
        raise ParseError("truth file has no track", None, path)
    k = np.array(knots, dtype=float).reshape(-1, 3)
    return GroundTruth(tuple(steps), Track(k[:, 0].copy(), k[:, 1].copy(), k[:, 2].copy()), subject, duration)


# -- fingerprint db --------------------------------------------------------


def db_text(db: FingerprintDb, metric_defaults: dict | None = None) -> str:
    head = {
        "format": DB_FORMAT,
        "version": DB_VERSION,
        "window_s": fmt(db.window_s),
        "grid_rate": fmt(db.grid_rate),
        "features": db.features,
        "channels": [c.code for c in CHANNELS],
        "metric_defaults": metric_defaults or {"metric": "mdtw", "k": 1, "thr_prune": fmt(0.1)},
    }
    lines = [json.dumps(head)]
    for fp in db.entries:
        rec = {
            "subject": fp.subject,
            "x": fmt(fp.location[0]),
            "y": fmt(fp.location[1]),
            "session": fp.session,
            "postures": None if fp.seq.postures is None else [fmt(p) for p in fp.seq.postures],
            "values": [[fmt(v) for v in col] for col in fp.seq.values.T],
        }
        lines.append(json.dumps(rec))
    return "\n".join(lines) + "\n"


def write_db(db: FingerprintDb, path, metric_defaults: dict | None = None) -> None:
    _write_text(path, db_text(db, metric_defaults))


def read_db_header(path) -> dict:
    ln, head = _json_lines(path)[0]
    _check_header(ln, head, DB_FORMAT, DB_VERSION, path)
    return head


def read_db(path) -> FingerprintDb:
    rows = _json_lines(path)
    ln, head = rows[0]
    _check_header(ln, head, DB_FORMAT, DB_VERSION, path)
    try:
        window_s = _float(head["window_s"], ln, path)
        grid_rate = _float(head["grid_rate"], ln, path)
        features = str(head.get("features", "slope"))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed header: {exc}", ln, path) from None
    entries = []
    for ln, rec in rows[1:]:
        try:
            cols = [[_float(v, ln, path) for v in col] for col in rec["values"]]
            lengths = {len(c) for c in cols}
            post = rec.get("postures")
            if post is not None:
                post = [_float(v, ln, path) for v in post]
                lengths.add(len(post))
            if len(lengths) != 1:
                raise ParseError("per-entry list lengths differ", ln, path)
            values = np.array(cols, dtype=float).T
            seq = FeatureSeq(values, None if post is None else np.array(post))
            loc = (_float(rec["x"], ln, path), _float(rec["y"], ln, path))
            entries.append(Fingerprint(seq, str(rec["subject"]), loc, str(rec.get("session", ""))))
        except ParseError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed fingerprint: {exc}", ln, path) from None
    return FingerprintDb(tuple(entries), window_s, grid_rate, features)


def write_ndjson(path, records: Iterable[dict]) -> None:
    _write_text(path, "".join(json.dumps(r, sort_keys=True) + "\n" for r in records))
