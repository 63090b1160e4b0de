import warnings

import pytest

from turing_rd.errors import MultipleEquilibria
from turing_rd.kinetics import KineticParams, find_equilibrium

# values printed for the reference experiment
REF_EQ = (0.113585, 0.471397)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-scale slow tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def params():
    return KineticParams(alpha=1.1, gamma=0.05, delta=0.5, epsilon=1.0, beta=1.0)


@pytest.fixture(scope="session")
def eq(params):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MultipleEquilibria)
        return find_equilibrium(params)


# acceptance verdict lines, printed at the end of the session
ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    def record(number, ok, detail):
        ACCEPTANCE_LINES.append((number, f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"))
        print(ACCEPTANCE_LINES[-1][1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES, key=lambda item: item[0]):
        terminalreporter.write_line(line)
