import sys

import numpy as np
import pytest

from gibbsqaoa.problems import Graph, maxcut_to_ising, random_maxcut


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance criteria pass/fail lines after capture is released."""
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def triangle():
    return Graph(n=3, edges=frozenset({(0, 1), (1, 2), (0, 2)}))


@pytest.fixture
def triangle_h(triangle):
    return maxcut_to_ising(triangle)


@pytest.fixture
def maxcut6():
    return maxcut_to_ising(random_maxcut(6, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
