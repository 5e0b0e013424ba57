from __future__ import annotations

import json
import subprocess
import sys

import pytest

from photostep.cli import run
from photostep.energy import PowerBudget


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, [json.loads(line) for line in out.splitlines()], err


def test_flat_file_has_no_steps(tmp_path, capsys):
    rows = "".join(f"{36 * k},0.5,0.5,0.5,0.5\n" for k in range(200))
    (tmp_path / "flat.csv").write_text("t_ms,lt,ls,rt,rs\n" + rows)
    code, out, _ = call(capsys, "detect", str(tmp_path / "flat.csv"))
    assert code == 0 and out[0]["steps"] == 0


def test_unknown_subcommand(capsys):
    code, out, err = call(capsys, "frobnicate")
    assert code == 2 and out == [] and "usage" in err


def test_missing_file(tmp_path, capsys):
    code, out, err = call(capsys, "detect", str(tmp_path / "nope.csv"))
    assert code == 1 and out == [] and "error" in err


def test_parse_error_reports_line(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("t_ms,lt,ls,rt,rs\n0,1,1,1,1\n0,1,1,1,1\n")
    code, out, err = call(capsys, "detect", str(tmp_path / "bad.csv"))
    assert code == 1 and out == [] and ":3" in err


def test_bad_parameter(tmp_path, capsys):
    code, out, err = call(capsys, "energy", "--duty", "2")
    assert code == 1 and out == []


def test_energy(capsys):
    code, out, _ = call(capsys, "energy", "--comm", "0.7")
    assert code == 0
    assert out[0]["total_mw_min"] == pytest.approx(2.56) and out[0]["total_mw_max"] == pytest.approx(2.89)
    assert out[0]["area_cm2_max"] == pytest.approx(48.17, abs=0.005)


def _loop(capsys, d):
    d.mkdir()
    s = str(d / "walk.csv")
    assert call(capsys, "simulate", "--out", s, "--duration", "20", "--noise", "0.02", "--seed", "3")[0] == 0
    code, out, _ = call(capsys, "detect", s, "--out", str(d / "steps.csv"), "--plot", str(d / "trace.png"))
    assert code == 0 and out[0]["steps"] > 10
    code, out, _ = call(capsys, "evaluate", "--steps", str(d / "steps.csv"), str(d / "walk.truth.ndjson"),
                        "--report-dir", str(d / "rep"))
    assert code == 0
    return out


def test_simulate_detect_evaluate_deterministic(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    from pathlib import Path

    a = _loop(capsys, Path("a"))
    b = _loop(capsys, Path("b"))
    assert a == b
    summary = a[-1]
    assert summary["kind"] == "steps_summary" and abs(summary["abs_pct"]) < 5
    names = ["walk.csv", "walk.truth.ndjson", "steps.csv", "trace.png", "rep/report.txt", "rep/report.ndjson"]
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes(), n


def test_identify_localize_evaluate(tmp_path, capsys):
    d = tmp_path
    sessions = []
    for subj in ("s1", "s2"):
        for seed in (1, 2):
            out = str(d / f"{subj}_{seed}.csv")
            assert call(capsys, "simulate", "--out", out, "--subject", subj, "--seed", str(seed),
                        "--duration", "25", "--noise", "0.02")[0] == 0
            sessions.append(out)
    args = []
    for s in sessions[::2]:
        args += ["--session", s, s[:-4] + ".truth.ndjson"]
    code, out, _ = call(capsys, "build-db", *args, "--out", str(d / "db.ndjson"), "--window", "3")
    assert code == 0 and out[0]["entries"] > 0
    q = sessions[1]
    code, rows, _ = call(capsys, "identify", q, "--db", str(d / "db.ndjson"), "--truth", q[:-4] + ".truth.ndjson")
    assert code == 0 and rows and all(r["true"] == "s1" for r in rows)
    (d / "ids.ndjson").write_text("".join(json.dumps(r) + "\n" for r in rows))
    code, rows, _ = call(capsys, "localize", q, "--db", str(d / "db.ndjson"), "--truth", q[:-4] + ".truth.ndjson")
    assert code == 0 and all("true_x" in r for r in rows)
    (d / "loc.ndjson").write_text("".join(json.dumps(r) + "\n" for r in rows))
    code, out, _ = call(capsys, "evaluate", "--labels", str(d / "ids.ndjson"), "--locations", str(d / "loc.ndjson"),
                        "--report-dir", str(d / "rep"))
    assert code == 0
    kinds = {r["kind"] for r in out}
    assert kinds == {"identification", "localization"}
    for n in ("confusion.png", "cdf.png", "cdf.csv", "report.txt", "report.ndjson"):
        assert (d / "rep" / n).stat().st_size > 0
    code, out, _ = call(capsys, "bench", "--db", str(d / "db.ndjson"), "--queries", str(d / "db.ndjson"),
                        "--methods", "mdtw,euclid", "--report-dir", str(d / "bench"))
    assert code == 0 and [r["method"] for r in out] == ["mdtw", "euclid"]
    assert all(r["accuracy_pct"] == 100.0 for r in out)
    assert (d / "bench" / "bench.png").exists()


def test_config_file_and_env(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"comm": 10.5, "adc": 0.0}))
    code, out, _ = call(capsys, "--config", str(cfg), "energy")
    assert code == 0 and out[0]["comm_mw"] == 10.5 and out[0]["total_mw_min"] == pytest.approx(10.5 + PowerBudget().compute_mw_min)
    code, out, _ = call(capsys, "--config", str(cfg), "energy", "--comm", "0.7")
    assert out[0]["comm_mw"] == 0.7
    monkeypatch.setenv("PHOTOSTEP_CONFIG", str(cfg))
    code, out, _ = call(capsys, "energy")
    assert out[0]["comm_mw"] == 10.5
    cfg.write_text(json.dumps({"no_such_option": 1}))
    code, out, err = call(capsys, "energy")
    assert code == 1 and "no_such_option" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "photostep", "energy"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["total_mw_max"] > 0
