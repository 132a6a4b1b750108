import numpy as np
import pytest

# Fixed seed for every Monte Carlo fixture in the suite.
SEED = 20261016

# Out-of-disk fraction of the figure-1 run (n=10, nu=95, 500 trials) at SEED,
# recorded from the first run of the suite; compared within a 95% binomial interval.
FIG1_OUTSIDE_FIXTURE = 0.1634
FIG1_COUNT = 5000

# Acceptance lines collected by tests/test_acceptance.py, printed at the end of the session.
ACCEPTANCE_LINES = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
