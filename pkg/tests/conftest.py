from pathlib import Path

import numpy as np
import pytest

from pdcperm.data import TwoGroupData

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_groups(rng):
    x = rng.standard_normal((9, 6)) + 0.8
    y = rng.standard_normal((7, 6))
    return TwoGroupData(x, y, "a", "b")


@pytest.fixture
def five_class_path():
    return DATA / "five_class.csv"


@pytest.fixture
def toy_path():
    return DATA / "toy.csv"


def pytest_configure(config):
    config._criteria = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: criterion(id, passed, detail)."""

    def record(cid, passed, detail, label=None):
        status = label or ("PASS" if passed else "FAIL")
        line = f"[{status}] criterion {cid}: {detail}"
        request.config._criteria.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criteria", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
