import pytest

from tsirelson.scenario import ConstraintSet, Scenario

ACCEPTANCE_LINES = []


@pytest.fixture
def tsirelson3():
    return Scenario(2, 3), ConstraintSet(((1, 1, 1), (2, 2, 2)))


@pytest.fixture
def shell3():
    return Scenario(2, 3), ConstraintSet(((1, 1, 1),))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
