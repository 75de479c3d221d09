import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion for the end-of-run summary."""
    state = {}

    def start(number: int, title: str):
        state["key"] = (number, title)
        ACCEPTANCE[(number, title)] = "FAIL"

    yield start
    key = state.get("key")
    if key is not None:
        rep = getattr(request.node, "rep_call", None)
        ACCEPTANCE[key] = "PASS" if rep is not None and rep.passed else "FAIL"


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), status in sorted(ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {title}")
