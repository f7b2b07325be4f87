import pytest

from attocell.params import SystemParams

# lines recorded by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params():
    return SystemParams()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
