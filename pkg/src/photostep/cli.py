"""Command-line interface.

Results go to stdout as JSON lines; diagnostics go to stderr. Exit status
is 0 on success, 1 on a domain or file error and 2 on a usage error.

A JSON config file (``--config`` or the ``PHOTOSTEP_CONFIG`` environment
variable) supplies defaults; command-line flags win over it. Keys are the
long option names with dashes or underscores, e.g. ``{"alpha": 0.3,
"t_thr": 2.0}``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import datastore, report
from .energy import HarvestModel, PowerBudget, budget_comm, required_area, total_power
from .errors import NoMatchError, ParameterError, PhotostepError
from .evaluate import bench_similarity, confusion, localization_report, step_metrics_suite
from .gait import StepDetectorConfig
from .pipeline import PipelineConfig, feature_records, process
from .recognition import KnnConfig, LocateMode, build_db, identify, localize, records_to_seq, slice_windows
from .signal import DEFAULT_RATE, Placement, resample_align
from .similarity import Metric
from .simulate import WalkScenario, acquire, default_profiles, grid_lights, lap_path, serpentine_path

CONFIG_ENV = "PHOTOSTEP_CONFIG"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _emit(rec: dict) -> None:
    sys.stdout.write(json.dumps(rec, sort_keys=True) + "\n")


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- shared option groups --------------------------------------------------


def _add_pipeline(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("signal processing")
    g.add_argument("--rate", type=float, default=DEFAULT_RATE, help="resampling grid rate in Hz (default 28)")
    g.add_argument("--alpha", type=float, default=PipelineConfig().alpha, help="low-pass smoothing factor in [0, 1)")
    g.add_argument("--prominence", type=float, default=None, help="fixed slope threshold in V/s (default: per trace)")
    g.add_argument("--refractory", type=float, default=StepDetectorConfig().refractory, help="minimum seconds between same-foot steps")
    g.add_argument("--t-thr", type=float, default=StepDetectorConfig().t_thr, help="same-foot gap below which a step is inferred")
    g.add_argument("--placements", default="top", help="comma list of cells used for detection: top, side")
    g.add_argument("--complement", action=argparse.BooleanOptionalAction, default=True, help="insert missing steps")


def _pipeline_cfg(a, features: str = "slope") -> PipelineConfig:
    try:
        placements = tuple(Placement(s.strip()) for s in a.placements.split(",") if s.strip())
    except ValueError as exc:
        raise ParameterError(str(exc)) from None
    det = StepDetectorConfig(a.prominence, a.refractory, a.t_thr, placements)
    return PipelineConfig(a.alpha, det, a.complement, features)


def _add_knn(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("matching")
    g.add_argument("--metric", default="mdtw", help="euclid, dtw or mdtw (default mdtw)")
    g.add_argument("-k", type=int, default=1, help="neighbours that vote")
    g.add_argument("--thr-prune", type=float, default=0.1, help="head posture gap that prunes a candidate")
    g.add_argument("--locate-mode", default="nearest", choices=[m.value for m in LocateMode])


def _knn_cfg(a) -> KnnConfig:
    return KnnConfig(a.k, Metric.parse(a.metric), a.thr_prune, LocateMode(a.locate_mode))


def _load_stream(path, rate: float):
    return resample_align(datastore.read_samples(path, rate), rate)


# -- subcommands -----------------------------------------------------------


def cmd_simulate(a) -> int:
    profiles = {p.name: p for p in default_profiles()}
    if a.subject not in profiles:
        raise ParameterError(f"unknown subject {a.subject!r}; choose from {', '.join(profiles)}")
    prof = profiles[a.subject]
    w, d = a.room
    if a.route == "lap":
        path = lap_path(w, d)
        lights = grid_lights(w, d, 6, 5, seed=a.light_seed)
    else:
        path = serpentine_path(w, d, a.spacing)
        lights = grid_lights(w, d, 4, 3, seed=a.light_seed)
    noise = a.noise if a.noise is not None else a.noise_fraction * prof.amplitude
    sc = WalkScenario(
        path, a.speed, a.duration, a.rate, noise, a.seed, tempo=a.tempo, gain=a.gain,
        max_steps=a.max_steps, dropout=a.dropout,
    )
    streams, truth = acquire(prof, lights, sc)
    datastore.write_samples(a.out, streams)
    truth_path = a.truth or str(Path(a.out).with_suffix("")) + ".truth.ndjson"
    datastore.write_truth(truth_path, truth)
    _emit({"samples": str(a.out), "truth": truth_path, "subject": prof.name, "steps": len(truth.steps), "rows": len(streams[0])})
    return 0


def cmd_detect(a) -> int:
    ms = _load_stream(a.samples, a.rate)
    pr = process(ms, _pipeline_cfg(a))
    if a.out:
        datastore.write_steps(a.out, pr.steps)
    left = sum(e.foot.value == "L" for e in pr.steps)
    _emit({"samples": str(a.samples), "steps": len(pr.steps), "left": left, "right": len(pr.steps) - left,
           "detected": len(pr.detected), "complemented": len(pr.steps) - len(pr.detected)})
    if a.plot:
        from .plotting import plot_trace

        plot_trace(pr.smoothed, pr.steps, a.plot)
        _info(f"wrote {a.plot}")
    return 0


def _labeled_records(samples, truth_path, a, features):
    truth = datastore.read_truth(truth_path)
    ms = _load_stream(samples, a.rate)
    return feature_records(ms, _pipeline_cfg(a, features), truth.subject, truth.track), truth


def cmd_build_db(a) -> int:
    streams = []
    sessions = []
    for samples, truth_path in a.session:
        recs, _ = _labeled_records(samples, truth_path, a, a.features)
        streams.append(recs)
        sessions.append(Path(samples).stem)
    db = build_db(streams, a.window, a.stride, a.rate, sessions, a.features)
    datastore.write_db(db, a.out, {"metric": "mdtw", "k": 1, "thr_prune": datastore.fmt(0.1)})
    _emit({"db": str(a.out), "entries": len(db), "sessions": len(streams), "window_s": db.window_s})
    return 0


def _query_windows(a, db):
    cfg = _pipeline_cfg(a, db.features)
    truth = None
    if a.truth:
        recs, truth = _labeled_records(a.samples, a.truth, a, db.features)
    else:
        recs = feature_records(_load_stream(a.samples, a.rate), cfg)
    stride = a.stride or db.window_s
    for start, win in slice_windows(recs, db.window_s, stride, db.grid_rate):
        mid = start + db.window_s / 2
        ref = min(win, key=lambda r: abs(r.t - mid))
        yield start, records_to_seq(win), truth, ref


def cmd_identify(a) -> int:
    db = datastore.read_db(a.db)
    cfg = _knn_cfg(a)
    for start, seq, truth, _ in _query_windows(a, db):
        rec = {"start": start, "metric": cfg.metric.value}
        try:
            res = identify(seq, db, cfg)
            rec.update(subject=res.subject, distance=res.distances[0])
        except NoMatchError:
            rec.update(subject=None, distance=None)
        if truth is not None:
            rec["true"] = truth.subject
        _emit(rec)
    return 0


def cmd_localize(a) -> int:
    db = datastore.read_db(a.db)
    cfg = _knn_cfg(a)
    for start, seq, truth, ref in _query_windows(a, db):
        rec = {"start": start, "metric": cfg.metric.value}
        try:
            x, y = localize(seq, db, cfg)
            rec.update(x=x, y=y)
        except NoMatchError:
            rec.update(x=None, y=None)
        if truth is not None:
            rec.update(true_x=ref.location[0], true_y=ref.location[1])
        _emit(rec)
    return 0


def _read_ndjson(path) -> list[dict]:
    out = []
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if line.strip():
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise datastore.ParseError(f"invalid JSON: {exc.msg}", ln, path) from None
    return out


def cmd_evaluate(a) -> int:
    outdir = Path(a.report_dir) if a.report_dir else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    if not (a.steps or a.labels or a.locations):
        raise ParameterError("nothing to evaluate: give --steps, --labels or --locations")
    text = []
    records: list[dict] = []
    if a.steps:
        traces = [(datastore.read_steps(p), list(datastore.read_truth(t).steps)) for p, t in a.steps]
        m = step_metrics_suite(traces)
        records += report.step_records(m)
        text.append(report.step_table(m))
    if a.labels:
        rows = [r for p in a.labels for r in _read_ndjson(p)]
        pairs = [(r["true"], r["subject"]) for r in rows]
        cm = confusion(pairs)
        records.append({"kind": "identification", "n": len(pairs), "accuracy": cm.accuracy})
        text.append(report.confusion_table(cm))
        if outdir:
            from .plotting import plot_confusion

            plot_confusion(cm, outdir / "confusion.png")
    if a.locations:
        rows = [r for p in a.locations for r in _read_ndjson(p) if r.get("x") is not None]
        rep = localization_report([((r["x"], r["y"]), (r["true_x"], r["true_y"])) for r in rows])
        records += report.localization_records(rep)
        text.append(report.text_table(("percentile", "error m"), [(p, v) for p, v in rep.percentiles.items()]))
        if outdir:
            from .plotting import plot_cdf

            report.write(outdir / "cdf.csv", report.cdf_csv({"query": rep}))
            plot_cdf({"query": rep}, outdir / "cdf.png")
    for r in records:
        _emit(r)
    if outdir:
        report.write(outdir / "report.txt", "\n".join(text))
        report.write(outdir / "report.ndjson", report.ndjson(records))
    else:
        sys.stderr.write("\n".join(text))
    return 0


def cmd_bench(a) -> int:
    db = datastore.read_db(a.db)
    queries = datastore.read_db(a.queries).entries
    methods = [Metric.parse(m) for m in (a.methods or "mdtw,euclid,dtw").split(",") if m]
    results = bench_similarity(db, queries, methods, KnnConfig(a.k, Metric.MODIFIED_DTW, a.thr_prune), a.repeat)
    recs = report.bench_records(results)
    for r in recs:
        _emit(r)
    sys.stderr.write(report.bench_table(results))
    if a.report_dir:
        from .plotting import plot_bench

        out = Path(a.report_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write(out / "bench.txt", report.bench_table(results))
        report.write(out / "bench.ndjson", report.ndjson(recs))
        plot_bench(results, out / "bench.png")
    return 0


def cmd_energy(a) -> int:
    b = PowerBudget(a.adc, a.compute_min, a.compute_max, a.comm_active, a.comm_sleep, a.duty)
    h = HarvestModel(a.density, a.pce, a.derating)
    comm = a.comm if a.comm is not None else budget_comm(b)
    lo, hi = total_power(b, comm)
    _emit({"comm_mw": comm, "total_mw_min": lo, "total_mw_max": hi,
           "area_cm2_min": required_area(lo, h), "area_cm2_max": required_area(hi, h)})
    return 0


def cmd_experiment(a) -> int:
    from . import experiments as ex
    from . import plotting

    out = Path(a.report_dir) if a.report_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    recs: list[dict] = []
    text = ""
    if a.name == "identify":
        res = ex.identification_lolo(metrics=ex.ALL_METRICS if a.all_metrics else (Metric.MODIFIED_DTW, Metric.EUCLIDEAN))
        for r in res:
            recs.append({"kind": "identification", "metric": r.metric.value, "accuracy": r.accuracy,
                         "queries": r.n_queries, "no_match": r.no_match})
            text += f"[{r.metric.value}]\n" + report.confusion_table(r.confusion)
            if out:
                plotting.plot_confusion(r.confusion, out / f"confusion_{r.metric.value}.png")
    elif a.name == "localize":
        res = ex.localization_experiment()
        reps = {r.metric.value: r.report for r in res}
        for r in res:
            recs += report.localization_records(r.report, r.metric.value)
            recs[-1]["self_max_error_m"] = r.self_max_error
        text = report.text_table(["metric", "median m", "p80 m", "max m"], [(k, v.median, v.p80, v.max) for k, v in reps.items()])
        if out:
            report.write(out / "cdf.csv", report.cdf_csv(reps))
            plotting.plot_cdf(reps, out / "cdf.png")
    elif a.name == "sweep":
        rows = ex.window_sweep()
        for w, rep in rows:
            recs += report.localization_records(rep, f"window_{w:g}s")
        text = report.text_table(["window s", "median m", "p80 m"], [(w, r.median, r.p80) for w, r in rows])
        if out:
            plotting.plot_window_sweep([(w, r.median) for w, r in rows], out / "window_sweep.png")
    elif a.name == "complement":
        res = ex.complement_experiment()
        recs += report.step_records(res.before, "before") + report.step_records(res.after, "after")
        text = "before\n" + report.step_table(res.before) + "after\n" + report.step_table(res.after)
    else:
        for nf in (0.0, 0.1):
            r = ex.step_recovery(nf)
            recs.append({"kind": "recovery", "noise_fraction": nf, "truth": r.truth, "detected": r.detected, "rate": r.rate})
        text = report.text_table(["noise", "truth", "detected", "recovered"], [(r["noise_fraction"], r["truth"], r["detected"], r["rate"]) for r in recs])
    for r in recs:
        _emit(r)
    if out:
        report.write(out / f"{a.name}.txt", text)
        report.write(out / f"{a.name}.ndjson", report.ndjson(recs))
    else:
        sys.stderr.write(text)
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="photostep", description="Steps, identity and position from shoe-mounted solar cells.")
    p.add_argument("--config", help=f"JSON file of option defaults (env {CONFIG_ENV})")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("simulate", help="write a synthetic samples file and its ground truth")
    s.add_argument("--out", required=True, help="samples CSV to write")
    s.add_argument("--truth", help="truth NDJSON (default: next to --out)")
    s.add_argument("--subject", default="s1", help="built-in subject s1..s6")
    s.add_argument("--route", choices=("lap", "serpentine"), default="lap")
    s.add_argument("--room", type=float, nargs=2, default=(18.0, 11.0), metavar=("W", "D"))
    s.add_argument("--spacing", type=float, default=1.0, help="serpentine lane spacing in m")
    s.add_argument("--light-seed", type=int, default=7)
    s.add_argument("--speed", type=float, default=1.1)
    s.add_argument("--duration", type=float, default=60.0)
    s.add_argument("--rate", type=float, default=DEFAULT_RATE)
    s.add_argument("--noise", type=float, default=None, help="noise sigma in V")
    s.add_argument("--noise-fraction", type=float, default=0.0, help="noise sigma as a fraction of signature amplitude")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tempo", type=float, default=1.0)
    s.add_argument("--gain", type=float, default=1.0)
    s.add_argument("--max-steps", type=int, default=None)
    s.add_argument("--dropout", type=float, default=0.0, help="fraction of steps left out of the signal")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("detect", help="detect steps in a samples file")
    s.add_argument("samples")
    s.add_argument("--out", help="step events CSV to write")
    s.add_argument("--plot", help="PNG of the smoothed trace with detections")
    _add_pipeline(s)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("build-db", help="fingerprint db from labeled sessions")
    s.add_argument("--session", nargs=2, action="append", required=True, metavar=("SAMPLES", "TRUTH"))
    s.add_argument("--out", required=True)
    s.add_argument("--window", type=float, default=5.0, help="window length in s")
    s.add_argument("--stride", type=float, default=1.0, help="window stride in s")
    s.add_argument("--features", choices=("slope", "level"), default="slope")
    _add_pipeline(s)
    s.set_defaults(func=cmd_build_db)

    for name, func, doc in (("identify", cmd_identify, "label each window of a samples file"),
                            ("localize", cmd_localize, "position of each window of a samples file")):
        s = sub.add_parser(name, help=doc)
        s.add_argument("samples")
        s.add_argument("--db", required=True)
        s.add_argument("--truth", help="truth NDJSON; adds true labels to the output")
        s.add_argument("--stride", type=float, default=None, help="query window stride (default: window length)")
        _add_pipeline(s)
        _add_knn(s)
        s.set_defaults(func=func)

    s = sub.add_parser("evaluate", help="score predictions against truth")
    s.add_argument("--steps", nargs=2, action="append", metavar=("PRED", "TRUTH"), help="step CSV and truth NDJSON")
    s.add_argument("--labels", action="append", help="identify output NDJSON with true labels")
    s.add_argument("--locations", action="append", help="localize output NDJSON with true positions")
    s.add_argument("--report-dir", help="directory for text, NDJSON, CSV and PNG reports")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("bench", help="accuracy and wall time of the similarity metrics")
    s.add_argument("--db", required=True)
    s.add_argument("--queries", required=True, help="db file of labeled query windows")
    s.add_argument("--methods", default=None, help="comma list of euclid, dtw, mdtw")
    s.add_argument("-k", type=int, default=1)
    s.add_argument("--thr-prune", type=float, default=0.1)
    s.add_argument("--repeat", type=int, default=1, help="timing repeats, fastest kept")
    s.add_argument("--report-dir")
    s.set_defaults(func=cmd_bench)

    b = PowerBudget()
    h = HarvestModel()
    s = sub.add_parser("energy", help="power draw and solar cell area")
    s.add_argument("--adc", type=float, default=b.adc_mw, help="mW")
    s.add_argument("--compute-min", type=float, default=b.compute_mw_min, help="mW")
    s.add_argument("--compute-max", type=float, default=b.compute_mw_max, help="mW")
    s.add_argument("--comm", type=float, default=None, help="communication draw in mW (overrides duty cycling)")
    s.add_argument("--comm-active", type=float, default=b.comm_active_mw, help="mW while transmitting")
    s.add_argument("--comm-sleep", type=float, default=b.comm_sleep_mw, help="mW while idle")
    s.add_argument("--duty", type=float, default=b.duty, help="fraction of time transmitting")
    s.add_argument("--density", type=float, default=h.density_uw_cm2, help="harvest in uW/cm2")
    s.add_argument("--pce", type=float, default=h.pce)
    s.add_argument("--derating", type=float, default=h.derating)
    s.set_defaults(func=cmd_energy)

    s = sub.add_parser("experiment", help="run a built-in simulator experiment")
    s.add_argument("name", choices=("identify", "localize", "sweep", "complement", "recovery"))
    s.add_argument("--report-dir")
    s.add_argument("--all-metrics", action="store_true", help="include full DTW in the identification run")
    s.set_defaults(func=cmd_experiment)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    path = known.config or os.environ.get(CONFIG_ENV)
    if not path:
        return
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise datastore.ParseError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
    if not isinstance(cfg, dict):
        raise ParameterError(f"{path}: config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    known_keys = set()
    for sp in subs.choices.values():
        dests = {a.dest for a in sp._actions}
        known_keys |= dests
        sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
    unknown = sorted(set(cfg) - known_keys)
    if unknown:
        raise ParameterError(f"{path}: unknown config keys {', '.join(unknown)}")


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (PhotostepError, OSError) as exc:
        _info(f"photostep: error: {exc}")
        return 1
    try:
        return args.func(args)
    except (PhotostepError, OSError) as exc:
        _info(f"photostep {args.command}: error: {exc}")
        return 1


def main() -> None:
    sys.exit(run())
