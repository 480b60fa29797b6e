import pytest

from cssr.alphabet import Corpus
from cssr.machine import generate
from cssr.processes import even_process


@pytest.fixture(scope="session")
def even():
    return even_process()


@pytest.fixture(scope="session")
def even_10k(even):
    return Corpus((generate(even, 10_000, 7),))


@pytest.fixture(scope="session")
def even_1m(even):
    return Corpus((generate(even, 1_000_000, 11),))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
