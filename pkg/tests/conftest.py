import numpy as np
import pytest
from hypothesis import settings

from nhphase.lattice import ModelParams

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

PHASE_I = ModelParams(1.0, 3.5, 2.5, 1.0, 0.0, 100)
PHASE_II = ModelParams(1.0, 3.5, 2.5, 1.3, 0.0, 100)
PHASE_III = ModelParams(1.0, 1.2, 1.6, 0.6, 0.0, 100)
PHASE_IV = ModelParams(1.0, 1.2, 1.6, 1.0, 0.0, 100)
FIG3 = ModelParams(1.0, 1.2, 1.6, 0.3398, 0.0, 40)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
