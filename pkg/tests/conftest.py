import warnings

import pytest

from aci.auxopt import NonConvergenceWarning
from aci.probdist import builtin
from aci.region import region_for

# PASS/FAIL lines recorded by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_nonconvergence():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        yield


@pytest.fixture(scope="session")
def zs():
    return builtin("zsource", [1 / 3])


@pytest.fixture(scope="session")
def conn():
    return builtin("connected", [0.05])


@pytest.fixture(scope="session")
def zs_region(zs):
    """zsource(1/3) at the default resolution g=20 with refinement."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        return region_for(zs, 20)


@pytest.fixture(scope="session")
def conn_region(conn):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        return region_for(conn, 10)


@pytest.fixture(scope="session")
def zs_region_small(zs):
    """A cheap zsource region for unit tests that only need a plausible shape."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        return region_for(zs, 6)
