import math

import numpy as np
import pytest

from cscoherent.classical import explicit_trajectory
from cscoherent.integration import QuadratureSpec
from cscoherent.schedule import ParameterSchedule


@pytest.fixture(scope="session")
def unit_pi():
    return ParameterSchedule.constant(tau=math.pi)


@pytest.fixture(scope="session")
def unit_2pi():
    return ParameterSchedule.constant(tau=2 * math.pi)


@pytest.fixture(scope="session")
def squeezed(unit_pi):
    """u = cos t, v = 2 sin t: rho^2 = 1 + 3 sin^2 t, Omega = 2, tau' = pi."""
    return explicit_trajectory(unit_pi, 1.0, 0.0, 0.0, 2.0)


@pytest.fixture(scope="session")
def stationary(unit_2pi):
    """u = cos t, v = sin t: rho = 1, Omega = 1."""
    return explicit_trajectory(unit_2pi, 1.0, 0.0, 0.0, 1.0)


@pytest.fixture(scope="session")
def quad():
    return QuadratureSpec(points_per_dim=64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    """Record and print a criterion verdict; returns the verdict for assertion."""
    def report(number, passed, detail):
        line = f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
