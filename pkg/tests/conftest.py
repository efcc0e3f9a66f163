import math

import pytest

from dumbbell_nls import make_grid

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """record(number, passed, detail): one PASS/FAIL line per acceptance criterion."""
    def _record(number: int, passed: bool, detail: str) -> bool:
        _CRITERIA[number] = (bool(passed), detail)
        print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}")


@pytest.fixture(scope="session")
def grid_half_pi():
    return make_grid(math.pi / 2, 64)


@pytest.fixture(scope="session")
def grid_pi():
    return make_grid(math.pi, 32)
