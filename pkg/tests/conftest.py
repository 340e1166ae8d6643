import pathlib

import pytest

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "src" / "defcalc" / "fixtures"

# criterion number -> summary line, filled by test_acceptance
ACCEPTANCE: dict = {}


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
