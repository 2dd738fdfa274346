from functools import lru_cache

import pytest

from tractor_poisson.checks import Context


@lru_cache(maxsize=None)
def context(n: int) -> Context:
    return Context(n)


@pytest.fixture
def ctx():
    return context


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
