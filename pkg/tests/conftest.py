import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

FIXTURES = TESTS / "fixtures"
POLICY_DIR = TESTS.parent / "src" / "treedrive" / "policies"


@pytest.fixture
def conservative_path():
    return POLICY_DIR / "conservative.dtp"


@pytest.fixture
def aggressive_path():
    return POLICY_DIR / "aggressive.dtp"


# Acceptance criteria append (status, name, detail) here; printed after the run.
ACCEPTANCE_LINES: list[tuple[str, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{status}  {name}: {detail}")
