import math

import pytest

from ellcover import DistanceModel

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


FIG4_PSI = (10.0, 20.0, 30.0, 40.0)


@pytest.fixture(scope="session")
def fig4_models():
    return {psi: DistanceModel.tilted_deg(300.0, 30.0, psi) for psi in FIG4_PSI}


@pytest.fixture(scope="session")
def fig7_models():
    return {
        "ellipse": DistanceModel.vertical(180.0, 90.0, 300.0),
        "circle": DistanceModel.vertical(180.0, 180.0, 300.0),
    }


def model_grid():
    """More than fifty configurations spanning all three branch structures."""
    out = []
    for H in (100.0, 300.0, 750.0, 1500.0):
        for th, ps in ((30, 5), (30, 20), (30, 30), (30, 40), (20, 55), (45, 10), (10, 70), (40, 45), (5, 1)):
            out.append(DistanceModel.tilted_deg(H, th, ps))
        for a, ratio in ((180.0, 1.0), (180.0, 2.0), (205.2, 205.2 / 188.5), (50.0, 7.0), (400.0, 1.3)):
            out.append(DistanceModel.vertical(a, a / ratio, H))
    return out


def deg(x):
    return math.radians(x)
