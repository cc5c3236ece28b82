import numpy as np
import pytest

from hybrid_tdgl.gap import GapParams, build_gap_table


@pytest.fixture(scope="session")
def cold_params():
    return GapParams(beta=8.82)


@pytest.fixture(scope="session")
def cold_table(cold_params):
    return build_gap_table(cold_params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
