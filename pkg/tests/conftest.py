import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wireshape.wire import BendLaw, WireSpec  # noqa: E402

# bisection root of the closed-form chord for l = 2 mm, n = 10, C = 18.7 mm (mpmath oracle)
THETA_STAR = 0.12676733707782938


@pytest.fixture
def wire():
    return WireSpec()


@pytest.fixture
def law():
    return BendLaw.constant(1.0, THETA_STAR)


@pytest.fixture
def reported_law():
    return BendLaw.constant(1.0, math.radians(6.89))


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion."""
    name = request.node.get_closest_marker("criterion").args[0]
    state = {"detail": ""}

    def note(detail):
        state["detail"] = detail

    yield note
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {state['detail']}" if state["detail"] else ""))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
