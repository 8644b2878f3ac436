import warnings

import pytest

from kepler2d import operator_algebra
from kepler2d.errors import BoundaryContaminationWarning


@pytest.fixture(scope="session")
def default_study():
    """The 256/512/1024 refinement study; about 20 s, so computed once."""
    return operator_algebra.refinement_study(operator_algebra.PRESETS["default"])


@pytest.fixture
def quiet_boundary():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryContaminationWarning)
        yield


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record an acceptance verdict; printed in the terminal summary."""
    def record(number: int, title: str, passed: bool, detail: str = ""):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}  {detail}".rstrip()
        _CRITERIA[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
