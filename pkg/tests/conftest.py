import numpy as np
import pytest

from rankmaxsum.dgp import CovarianceSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture()
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def ar1_07():
    return CovarianceSpec(p=200, rho=0.7)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
