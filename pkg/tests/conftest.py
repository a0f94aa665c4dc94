import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qposmaps", max_examples=25, deadline=None)
settings.load_profile("qposmaps")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)



def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
