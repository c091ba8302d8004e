import functools

import pytest

from dlpet import bundle, calculations

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def fixture_system():
    return bundle.load_fixtures()


@functools.lru_cache(maxsize=None)
def partition_report():
    return bundle.verify_partition(fixture_system())


@functools.lru_cache(maxsize=None)
def calc_report(name: str):
    return calculations.run(name, fixture_system())


@pytest.fixture(scope="session")
def system():
    return fixture_system()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
