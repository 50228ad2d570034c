import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relmonoid.sieve import classify_all  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture(scope="session")
def classifications():
    """Symmetry-reduced sieve results for n = 1..4, computed once."""
    return {n: classify_all(n, "reduced", workers=1) for n in range(1, 5)}


@pytest.fixture(scope="session")
def b4(classifications):
    return classifications[4]


# One pass/fail line per acceptance criterion at the end of the run.

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance.items():
        terminalreporter.write_line(f"{outcome}  {name}")
