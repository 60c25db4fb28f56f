import json
import logging
import math
from pathlib import Path

import numpy as np
import pytest

from heatsched import Scenario, ThermalParams

DATA = Path(__file__).parent / "data"


def explicit_params(alpha=0.5, cap=3.0, sigma2=1.0):
    """Unit beta and T_e = 0, so the filtered-power budget equals ``cap``."""
    return ThermalParams.from_coefficients(alpha, 1.0, T_e=0.0, T_c=cap, sigma2=sigma2)


def implicit_params(alpha=0.5, gamma0=1.0, cap=math.inf):
    return ThermalParams.from_coefficients(alpha, 1.0, T_e=0.0, T_c=cap, gamma0=gamma0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def hand_explicit():
    """D=2, alpha=0.5, beta=1, cap=3, sigma2=1, E=[10, 10]."""
    return Scenario(explicit_params(), [10.0, 10.0])


@pytest.fixture
def hand_high_sinr():
    return Scenario(implicit_params(), [3.0, 0.0])


@pytest.fixture
def reference():
    return json.loads((DATA / "reference.json").read_text())


@pytest.fixture(autouse=True)
def _quiet_logs():
    logging.getLogger("heatsched").setLevel(logging.ERROR)
    yield


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line, then fail the test on FAIL."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


_VERDICTS = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
