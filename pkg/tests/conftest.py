import math

import pytest

from torsion_vsa.actuator import VsaConfig
from torsion_vsa.config import default_config
from torsion_vsa.landing import DropScenario
from torsion_vsa.leg_kinematics import LegParams
from torsion_vsa.spring import TorsionSpringParams

REF_KAPPA = 0.5
REF_RS = 0.05


@pytest.fixture
def spring():
    return TorsionSpringParams(REF_KAPPA, REF_RS)


@pytest.fixture
def cfg(spring):
    """Reference actuator with belt limits that never trigger."""
    return VsaConfig(spring, 0.05, 0.075, belt_min_tension=0.0, belt_max_tension=1e12)


@pytest.fixture(scope="session")
def run_config():
    return default_config()


@pytest.fixture
def calib_leg(run_config):
    return run_config.leg_params()


@pytest.fixture
def ref_scenario():
    return DropScenario(0.295, 0.135, math.radians(35.0))


@pytest.fixture
def light_leg():
    return LegParams(L=0.15, m=0.3, g=9.81, ground_offset=0.0)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion; echoed in the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
