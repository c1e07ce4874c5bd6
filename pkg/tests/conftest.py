import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nilkex import UnitriangularGroup, WreathGroup, parse_platform  # noqa: E402

PLATFORMS = ["ut:2:7", "ut:3:5", "ut:4:7", "ut:4:101", "ut:5:101", "ut:3:2147483647", "wreath:2", "wreath:3", "wreath:5"]


@pytest.fixture(params=PLATFORMS)
def platform(request):
    return parse_platform(request.param)


@pytest.fixture
def rng():
    return random.Random(20261015)


@pytest.fixture
def ut35():
    return UnitriangularGroup(3, 5)


@pytest.fixture
def w3():
    return WreathGroup(3)


_acceptance: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion, reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        _acceptance[marker.args[0]] = "PASS" if report.passed else "FAIL"
    elif marker and report.when == "setup" and report.failed:
        _acceptance[marker.args[0]] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_acceptance):
        terminalreporter.write_line(f"{_acceptance[label]}  {label}")
