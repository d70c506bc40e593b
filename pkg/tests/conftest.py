import numpy as np
import pytest

from qpburgers.profiles import boundary_from_alpha, make_boundary, sample, symmetric_profile

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def b05():
    return boundary_from_alpha(0.5)


@pytest.fixture
def asym():
    return make_boundary(0.3, 0.8)


@pytest.fixture
def ubar6(b05):
    """The finite-volume minimizer on (-6, 6) sampled with 600 cells."""
    return sample(symmetric_profile(b05, 6.0), -6.0, 6.0, 600)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
