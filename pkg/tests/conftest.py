import math

import pytest

from phasesqueeze.opo import OpoCoupling, drive_from_gain

# configurations A and B of the experiment; A uses the published efficiencies
BETA_A, GAIN_A = 5.70, 2.75
BETA_B, GAIN_B = 2.05, 3.12
COUPLING_A = OpoCoupling(0.008, 0.937)
COUPLING_B = OpoCoupling(0.079, 0.871)
# parameters of the phase-space illustrations
FIG2_COUPLING = OpoCoupling(0.08, 0.87)
FIG2_D = 0.40
IDENTITY = OpoCoupling(0.5, 0.5)

QUARTER_PI = math.pi / 4


@pytest.fixture
def config_a():
    return BETA_A, COUPLING_A, drive_from_gain(GAIN_A)


@pytest.fixture
def config_b():
    return BETA_B, COUPLING_B, drive_from_gain(GAIN_B)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
