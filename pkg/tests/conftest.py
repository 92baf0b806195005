import sys

import numpy as np
import pytest

from chemomild.spectral import make_grid


@pytest.fixture
def grid2():
    return make_grid(2, 2 * np.pi, 32)


@pytest.fixture
def grid3():
    return make_grid(3, 2 * np.pi, 16)


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acc.RESULTS):
        terminalreporter.write_line(acc.line(number))
