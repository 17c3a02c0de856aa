import math

import numpy as np
import pytest

from ndnoma import SystemParams, derive
from ndnoma.noise import ChannelRealization

SQ = math.sqrt(0.5)


@pytest.fixture
def ul_powers():
    return derive(SystemParams(), "uplink")


@pytest.fixture
def dl_powers():
    return derive(SystemParams(beta=1 / 1024), "downlink")


@pytest.fixture
def los_channel():
    h = complex(SQ, SQ)
    return ChannelRealization(h, h, h)


def rng(seed=0):
    return np.random.default_rng(seed)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
