import time

import pytest

from nxent import density, fock_state

SESSION = {"start": None, "criteria": []}


def pytest_sessionstart(session):
    SESSION["start"] = time.perf_counter()


def pytest_collection_modifyitems(config, items):
    # the wall-clock criterion must observe the whole session, so it runs last
    last = [it for it in items if "test_c11_" in it.name]
    rest = [it for it in items if "test_c11_" not in it.name]
    items[:] = rest + last


def pytest_terminal_summary(terminalreporter):
    lines = SESSION["criteria"]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def session_clock():
    return SESSION


@pytest.fixture(scope="session")
def vacuum_density():
    return density(fock_state(0, 0), 0)
