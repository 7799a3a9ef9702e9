import csv
from pathlib import Path

import pytest

from weilmaass.bigarith import make_context

DATA = Path(__file__).parent / "data"
ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def ctx30():
    return make_context(30)


def load_golden(name):
    with open(DATA / f"golden_{name}.csv", newline="") as fh:
        return list(csv.DictReader(fh))


# one summary line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
