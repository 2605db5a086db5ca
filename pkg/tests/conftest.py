import numpy as np
import pytest

from netcap.numerics import QuadratureGrid


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def grid1():
    return QuadratureGrid(1, 64)


@pytest.fixture
def grid2():
    return QuadratureGrid(2, 32)


ACCEPTANCE_LINES = []


@pytest.fixture
def report_line():
    """Record one acceptance line; shown in the terminal summary."""

    def record(number, passed, text):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
