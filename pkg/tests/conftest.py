import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")

from geoquant import from_points  # noqa: E402


@pytest.fixture
def five_line():
    return from_points([[-2, 0], [-1, 0], [0, 0], [1, 0], [2, 0]])


@pytest.fixture
def three_line():
    return from_points([[-1, 0], [0, 0], [1, 0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
