import pytest

from aerq.core import validate_dataset

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def fixture_data():
    """y = (1, 3, 2), one regressor (0, 1, 3)."""
    return validate_dataset([1.0, 3.0, 2.0], [0.0, 1.0, 3.0])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
