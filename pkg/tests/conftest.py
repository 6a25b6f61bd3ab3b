import numpy as np
import pytest

from edgefilter.weights import WeightMatrix

ACCEPTANCE = {}


def random_tridiagonal(rng, n, lo=0.05, hi=1.0, diag=None):
    """Random nonnegative tridiagonal weight matrix (connected)."""
    bands = np.zeros((2, n))
    bands[0] = rng.uniform(0.5, 1.5, n) if diag is None else diag
    bands[1, : n - 1] = rng.uniform(lo, hi, n - 1)
    return WeightMatrix(bands)


@pytest.fixture
def rng():
    return np.random.default_rng(20150315)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and rep.when == "call":
        key = marker.args[0]
        prev = ACCEPTANCE.get(key, (True, marker.args[1]))
        ACCEPTANCE[key] = (prev[0] and rep.passed, marker.args[1])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion covered by a test")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {text}")
