import numpy as np
import pytest

from toric_limits.configurations import grid, pentagon, unit_square

GAUGE = ["(1,1)", "(1/2,3/2)", "(0,1)"]


@pytest.fixture
def pent():
    return pentagon()


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def grid3():
    return grid(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    store = item.config._criteria
    entry = store.setdefault(num, {"title": title, "ok": True, "seen": False})
    if call.when == "call":
        entry["seen"] = True
    if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = getattr(config, "_criteria", {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(store):
        e = store[num]
        status = "PASS" if e["ok"] and e["seen"] else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {num}: {e['title']}")
