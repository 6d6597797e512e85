import os

import pytest
from hypothesis import HealthCheck, settings

from wallachflow.space import make_space

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

WALLACH = ["1/9", "1/8", "1/6"]


@pytest.fixture(params=WALLACH)
def wallach(request):
    return make_space(request.param)


@pytest.fixture
def w12():
    return make_space("1/8", 4)



def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if "test_acceptance" in rep.nodeid and rep.when == "call":
                lines += [ln for ln in rep.capstdout.splitlines() if ln.startswith(("[PASS]", "[FAIL]"))]
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(ln)
