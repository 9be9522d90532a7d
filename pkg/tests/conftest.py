import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tumourlab.grid import Grid
from tumourlab.model import GrowthModel

settings.register_profile(
    "lab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lab")


@pytest.fixture
def host_model():
    return GrowthModel.tumour_host()


@pytest.fixture
def clones_model():
    return GrowthModel.two_clones()


@pytest.fixture
def grid600():
    return Grid(3.0, 600)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict_line():
    """Record one acceptance line; all lines are repeated in the terminal summary."""

    def emit(number, name, passed, value, threshold):
        line = f"criterion {number} [{name}]: {'PASS' if passed else 'FAIL'} value={value} threshold={threshold}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
