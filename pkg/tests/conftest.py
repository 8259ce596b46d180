import sys
from pathlib import Path

import pytest

from bindery.config import Config

FIXTURES = Path(__file__).parent / "fixtures"
BOOKS = FIXTURES / "books"
ORACLES = Path(__file__).parent / "oracles"

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def config():
    return Config()


@pytest.fixture
def fixture_books():
    return sorted(BOOKS.glob("pg*.txt"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running end-to-end test")


_ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion" in report.nodeid:
        if report.when == "call" or report.failed:
            name = report.nodeid.split("::")[-1]
            _ACCEPTANCE_RESULTS.setdefault(name, report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        verdict = "PASS" if _ACCEPTANCE_RESULTS[name] else "FAIL"
        label = name.replace("test_criterion_", "criterion ")
        terminalreporter.write_line(f"{verdict}  {label}")
