import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPT = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record(request):
    """Record one acceptance line: ``record("4", "coverage", ok, "detail")``."""
    log = request.config.stash.setdefault(_ACCEPT, [])

    def _rec(criterion: str, name: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {name} -- {detail}"
        log.append(line)
        print(line)
        return ok

    return _rec


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPT, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for line in log:
        terminalreporter.write_line(line)
