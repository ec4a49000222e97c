import pytest

from hardyz.acceptance import AcceptanceContext
from hardyz.moments import build_grid

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acc_ctx():
    return AcceptanceContext()


@pytest.fixture(scope="session")
def grid10k(acc_ctx):
    return acc_ctx.grid


@pytest.fixture(scope="session")
def data10k(acc_ctx):
    return acc_ctx.data


@pytest.fixture(scope="session")
def grid2k():
    return build_grid(1.0, 2000.0, 0.05)


@pytest.fixture(scope="session")
def acceptance_lines():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
