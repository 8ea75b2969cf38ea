import numpy as np
import pytest

from parkopt.geometry import polygon_from_vertices

_CRITERIA_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA_KEY] = []


@pytest.fixture
def report_criterion(request):
    """Record one ``PASS``/``FAIL`` line for the acceptance summary."""
    lines = request.config.stash[_CRITERIA_KEY]

    def record(number: int, ok: bool, detail: str = ""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def unit_square(dx=0.0, dy=0.0):
    return polygon_from_vertices([[1 + dx, 1 + dy], [dx, 1 + dy], [dx, dy], [1 + dx, dy]])


def rect(x0, x1, y0, y1):
    return polygon_from_vertices([[x1, y1], [x0, y1], [x0, y0], [x1, y0]])
