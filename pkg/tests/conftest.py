import os

import pytest
from hypothesis import HealthCheck, settings

from vorwave import heightfield as hfm
from vorwave.vorticity import constant

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def neg1():
    return constant(-1.0)


@pytest.fixture(scope="session")
def small_wave(neg1):
    """omega = -1, period 10, amplitude 0.01, default grid."""
    return hfm.solve_stokes(neg1, 10.0, amplitude=0.01)


@pytest.fixture(scope="session")
def scan_wave(neg1):
    """Same wave on the coarser scan grid; cheap enough for many evaluations."""
    return hfm.solve_stokes(neg1, 10.0, amplitude=0.01, n_q=hfm.SCAN_NQ, n_p=hfm.SCAN_NP)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
