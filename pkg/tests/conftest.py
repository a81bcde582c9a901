from pathlib import Path

import pytest

from qsched import Circuit, default_platform, parse_circuit

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def s17():
    return default_platform()


@pytest.fixture
def running_example() -> Circuit:
    return parse_circuit((DATA / "running_example.qc").read_text())


@pytest.fixture
def data_dir() -> Path:
    return DATA


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
