"""Shared fixtures and the per-criterion PASS/FAIL summary.

Acceptance tests carry ``@pytest.mark.criterion("N")``. A criterion passes when
every test tagged with it passes; criteria with a runtime budget for the whole
session are checked against the wall clock at the end.
"""
import time
from collections import defaultdict

import pytest

CRITERIA = {
    "1": "transition-pulse matrix oracles",
    "2": "controlled-swap semantics",
    "3": "state pipeline",
    "4": "CNOT/Toffoli construction",
    "5": "spectral structure",
    "6": "soft-pulse physics",
    "7": "property suites",
    "8": "CLI contract",
}
SESSION_BUDGET_S = 60.0

_outcomes = defaultdict(list)
_measured = defaultdict(list)
_start = time.perf_counter()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion the test belongs to")


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        crit = getattr(report, "criterion", None)
        if crit:
            _outcomes[crit].append((report.nodeid, report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker:
        outcome.get_result().criterion = marker.args[0]


@pytest.fixture
def measured(request):
    """Record a measured value for the acceptance summary: ``measured("key", value)``."""
    marker = request.node.get_closest_marker("criterion")
    crit = marker.args[0] if marker else "-"

    def record(key, value):
        _measured[crit].append(f"{key} = {value}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    elapsed = time.perf_counter() - _start
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, title in CRITERIA.items():
        results = _outcomes.get(crit)
        if not results:
            continue
        failed = [nodeid for nodeid, outcome in results if outcome != "passed"]
        extra = ""
        if crit == "7":
            extra = f"; session {elapsed:.1f} s (budget {SESSION_BUDGET_S:.0f} s)"
            if elapsed >= SESSION_BUDGET_S:
                failed.append("session runtime budget")
        verdict = "FAIL" if failed else "PASS"
        passed = sum(outcome == "passed" for _, outcome in results)
        tr.write_line(f"{verdict} criterion {crit}: {title} ({passed}/{len(results)} tests{extra})")
        for nodeid in failed:
            tr.write_line(f"    failed: {nodeid}")
        for line in _measured.get(crit, []):
            tr.write_line(f"    measured: {line}")
