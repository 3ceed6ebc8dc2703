import numpy as np
import pytest

from holomem.model import SystemParams
from holomem.schedules import Leg, PiecewiseSchedule, cycle_for_margin

# acceptance verdicts collected by tests/test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def resonant():
    return SystemParams(g_sqrt_N=1.0)


@pytest.fixture(scope="session")
def detuned():
    return SystemParams(g_sqrt_N=1.3, delta_p=0.4, delta_1=0.21, delta_2=-0.13)


@pytest.fixture(scope="session")
def short_cycle():
    """One loop at margin 1e-2: quick but still a proper write / rotate / read cycle."""
    return cycle_for_margin(1e-2, sweep=1.0).build()


@pytest.fixture(scope="session")
def smooth_loop():
    """Short smooth loop with moderate Omega, for derivative checks."""
    legs = [Leg(20.0, 5.0, 0.3, 0.1, 0.1), Leg(20.0, 0.3, 0.3, 0.1, 1.2), Leg(20.0, 0.3, 5.0, 1.2, 1.2)]
    return PiecewiseSchedule(legs, scale=1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture(scope="session")
def designs():
    """Resonant phase designs at the default margin, built once per session."""
    from holomem.protocol import design_phase_schedule
    p = SystemParams()
    cache = {}

    def get(phi, margin=1e-3):
        key = (phi, margin)
        if key not in cache:
            cache[key] = design_phase_schedule(p, phi, max_margin_bound=margin)
        return cache[key]

    return get
