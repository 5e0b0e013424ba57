from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from photostep import datastore as ds
from photostep.errors import IncompatibleVersionError, InputError, ParseError
from photostep.gait import Origin, StepEvent
from photostep.recognition import Fingerprint, FingerprintDb, KnnConfig, identify, localize
from photostep.signal import CHANNELS, Foot, SampleStream
from photostep.similarity import FeatureSeq
from photostep.simulate import WalkScenario, acquire, default_profiles, grid_lights, lap_path

floats = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_two_row_file(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("t_ms,lt,ls,rt,rs\n0,1,2,3,4\n36,1.5,2.5,3.5,4.5\n")
    streams = ds.read_samples(p)
    assert [s.channel for s in streams] == list(CHANNELS)
    assert all(len(s) == 2 for s in streams)
    assert streams[2].v.tolist() == [3.0, 3.5] and streams[0].t.tolist() == [0.0, 0.036]


@pytest.mark.parametrize(
    "body,line",
    [
        ("t_ms,lt,ls,rt,rs\n10,1,1,1,1\n5,1,1,1,1\n", 3),
        ("t_ms,lt,ls,rt,rs\n0,1,1,x,1\n", 2),
        ("t_ms,lt,ls,rt,rs\n0,1,1,1\n", 2),
        ("t_ms,lt,ls,rt,rs\n0,1,1,1,1\n1.5,1,1,1,1\n", 3),
        ("t_ms,lt,ls,rt,rs\n0,1,1,nan,1\n", 2),
        ("time,lt,ls,rt,rs\n0,1,1,1,1\n", 1),
        ("", 1),
    ],
)
def test_bad_samples(tmp_path, body, line):
    p = tmp_path / "s.csv"
    p.write_text(body)
    with pytest.raises(ParseError) as exc:
        ds.read_samples(p)
    assert exc.value.line == line
    assert f":{line}" in str(exc.value)


def test_simulator_file_round_trip(tmp_path):
    streams, truth = acquire(default_profiles()[1], grid_lights(8, 6, 2, 2), WalkScenario(lap_path(8, 6), duration=8, noise_sigma=0.03, seed=5))
    ds.write_samples(tmp_path / "a.csv", streams)
    back = ds.read_samples(tmp_path / "a.csv")
    assert back == streams
    ds.write_truth(tmp_path / "a.truth", truth)
    t2 = ds.read_truth(tmp_path / "a.truth")
    assert t2.steps == truth.steps and t2.track == truth.track
    assert (t2.subject, t2.duration) == (truth.subject, truth.duration)


def test_write_samples_rejects_bad_input(tmp_path):
    t = np.array([0.0, 0.0365])
    streams = [SampleStream(c, t, [1.0, 2.0]) for c in CHANNELS]
    with pytest.raises(InputError):
        ds.write_samples(tmp_path / "x.csv", streams)
    with pytest.raises(InputError):
        ds.write_samples(tmp_path / "x.csv", streams[:3])


@given(arrays(np.float64, (5, 4), elements=floats))
def test_samples_lossless(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("s") / "s.csv"
    t = np.arange(5) * 36 / 1000.0
    streams = [SampleStream(c, t, vals[:, k]) for k, c in enumerate(CHANNELS)]
    ds.write_samples(path, streams)
    assert ds.read_samples(path) == streams


@given(st.lists(st.tuples(st.floats(0, 1e6), st.sampled_from(list(Foot)), st.sampled_from(list(Origin))), max_size=20))
def test_steps_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("e") / "e.csv"
    events = [StepEvent(t, f, o) for t, f, o in sorted(rows, key=lambda r: r[0])]
    ds.write_steps(path, events)
    assert ds.read_steps(path) == events


def test_bad_steps(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("t,foot,origin\n1.0,X,detected\n")
    with pytest.raises(ParseError) as exc:
        ds.read_steps(p)
    assert exc.value.line == 2


def _db(rng, n, length=10):
    entries = []
    for k in range(n):
        post = np.mod(rng.uniform(0, 2) + np.arange(length) / 7.0, 2.0)
        entries.append(Fingerprint(FeatureSeq(rng.normal(size=(length, 4)), post), f"s{k % 6}", tuple(rng.uniform(0, 10, 2)), f"lap{k % 5}"))
    return FingerprintDb(tuple(entries), 5.0, 28.0, "level")


def test_empty_db(tmp_path):
    db = FingerprintDb((), 5.0, 28.0)
    ds.write_db(db, tmp_path / "db")
    assert len((tmp_path / "db").read_text().splitlines()) == 1
    back = ds.read_db(tmp_path / "db")
    assert len(back) == 0 and back.window_s == 5.0


def test_one_entry_db(tmp_path, rng):
    db = _db(rng, 1)
    ds.write_db(db, tmp_path / "db")
    back = ds.read_db(tmp_path / "db")
    a, b = db.entries[0], back.entries[0]
    assert a.seq == b.seq and a.subject == b.subject and a.location == b.location and a.session == b.session
    assert (back.window_s, back.grid_rate, back.features) == (5.0, 28.0, "level")


def test_large_db_queries_unchanged(tmp_path, rng):
    db = _db(rng, 1000)
    ds.write_db(db, tmp_path / "db")
    back = ds.read_db(tmp_path / "db")
    assert all(x.seq == y.seq and x.location == y.location for x, y in zip(db.entries, back.entries))
    cfg = KnnConfig(k=3, thr_prune=1.0)
    for q in _db(rng, 20).entries:
        assert identify(q.seq, db, cfg) == identify(q.seq, back, cfg)
        assert localize(q.seq, db, cfg) == localize(q.seq, back, cfg)


def test_db_without_postures(tmp_path):
    db = FingerprintDb((Fingerprint(FeatureSeq(np.ones((3, 4))), "s", (1.0, 2.0)),))
    ds.write_db(db, tmp_path / "db")
    assert ds.read_db(tmp_path / "db").entries[0].seq.postures is None


def test_db_version_mismatch(tmp_path, rng):
    ds.write_db(_db(rng, 2), tmp_path / "db")
    lines = (tmp_path / "db").read_text().splitlines()
    lines[0] = lines[0].replace('"version": 1', '"version": 99')
    (tmp_path / "db").write_text("\n".join(lines) + "\n")
    with pytest.raises(IncompatibleVersionError):
        ds.read_db(tmp_path / "db")


def test_db_corrupt_line(tmp_path, rng):
    ds.write_db(_db(rng, 4), tmp_path / "db")
    lines = (tmp_path / "db").read_text().splitlines()
    lines[2] = lines[2][:-5]
    (tmp_path / "db").write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as exc:
        ds.read_db(tmp_path / "db")
    assert exc.value.line == 3


def test_db_inconsistent_lengths(tmp_path, rng):
    ds.write_db(_db(rng, 1), tmp_path / "db")
    text = (tmp_path / "db").read_text().replace('"postures": ["', '"postures": ["0.5", "', 1)
    (tmp_path / "db").write_text(text)
    with pytest.raises(ParseError) as exc:
        ds.read_db(tmp_path / "db")
    assert exc.value.line == 2


@settings(max_examples=30)
@given(arrays(np.float64, (3, 4), elements=floats), floats, floats)
def test_db_lossless(tmp_path_factory, vals, x, y):
    path = tmp_path_factory.mktemp("d") / "db"
    db = FingerprintDb((Fingerprint(FeatureSeq(vals, [0.0, 1.0, 1.9999999999999998]), "s", (x, y), "z"),), 4.5, 30.0)
    ds.write_db(db, path)
    back = ds.read_db(path)
    assert back.entries[0].seq == db.entries[0].seq and back.entries[0].location == (x, y)


def test_documented_samples_parse():
    from pathlib import Path

    d = Path(__file__).resolve().parent.parent / "docs" / "samples"
    assert len(ds.read_samples(d / "walk.csv")[0]) == 42
    assert len(ds.read_steps(d / "steps.csv")) == 2
    assert ds.read_truth(d / "walk.truth.ndjson").subject == "s1"
    assert ds.read_db(d / "db.ndjson").entries[0].location == (1.0, 2.5)
