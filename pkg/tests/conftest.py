import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from surfrev import bscurve, counting  # noqa: E402
from surfrev.profiles import make_profile  # noqa: E402

SPHERE = {"kind": "sphere"}
PROLATE = {"kind": "ellipsoid", "a": 1.0, "b": 2.0}
OBLATE = {"kind": "ellipsoid", "a": 2.0, "b": 1.0}
BELL = {"kind": "bell"}

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def sphere():
    return make_profile(SPHERE)


@pytest.fixture(scope="session")
def prolate():
    return make_profile(PROLATE)


@pytest.fixture(scope="session")
def oblate():
    return make_profile(OBLATE)


@pytest.fixture(scope="session")
def bell():
    return make_profile(BELL)


@pytest.fixture(scope="session")
def sphere_curve(sphere):
    return bscurve.build_curve(sphere)


@pytest.fixture(scope="session")
def prolate_curve(prolate):
    return bscurve.build_curve(prolate)


@pytest.fixture(scope="session")
def oblate_curve(oblate):
    return bscurve.build_curve(oblate)


@pytest.fixture(scope="session")
def bell_curve(bell):
    return bscurve.build_curve(bell)


@pytest.fixture(scope="session")
def prolate_series(prolate_curve):
    return counting.error_series(prolate_curve, 50.0, 2050.0, 400_000, threads=4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
