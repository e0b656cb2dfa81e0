import numpy as np
import pytest

R15 = np.log(10**1.5) / 2  # 15 dB input squeezing
V15 = 10**-1.5


@pytest.fixture
def r15():
    return R15


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
