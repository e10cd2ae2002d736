import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pibt_tiebreak import DistanceCache, GridMap

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def grid_from(rows: list[str]) -> GridMap:
    return GridMap.from_mask(np.array([[ch == "." for ch in row] for row in rows]))


@pytest.fixture
def open3():
    return grid_from(["...", "...", "..."])


@pytest.fixture
def open3_dists(open3):
    return DistanceCache(open3)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
