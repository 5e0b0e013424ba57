from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from photostep.signal import CHANNELS, MultiStream

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_ms(values, rate=28.0, t0=0.0):
    """MultiStream with the same values on all four channels, or one array per channel."""
    vals = values if isinstance(values, dict) else {c: np.asarray(values, float) for c in CHANNELS}
    n = len(next(iter(vals.values())))
    return MultiStream(t0 + np.arange(n) / rate, vals, rate)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record and print one ``[PASS]``/``[FAIL]`` line, then assert it."""
    lines = request.config.stash[_VERDICTS]

    def check(label: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
