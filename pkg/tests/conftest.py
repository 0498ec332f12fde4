import pytest

from coinsearch import verification

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def sweeps():
    """Exhaustive sweep reports for m = 2..7, computed once per session."""

    class _Lazy(dict):
        def __missing__(self, m):
            self[m] = verification.cached_sweep(m)
            return self[m]

    return _Lazy()


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
