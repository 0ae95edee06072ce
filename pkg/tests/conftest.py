import numpy as np
import pytest

from charpoly.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(20240601, 0)


def stream(seed: int, sid: int = 0) -> RngStream:
    return RngStream(seed, sid)


def assert_within(est, exact, se, z=5.0):
    assert abs(est - exact) <= z * se, f"{est} vs {exact}: z = {(est - exact) / se:.2f}"


def mean_se(x):
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size))


# one summary line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
