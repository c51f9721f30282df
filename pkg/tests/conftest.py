import os
from datetime import datetime, timedelta

import pytest
from hypothesis import HealthCheck, settings

from ctf_attribution.events import AttackEvent

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

T0 = datetime(2013, 8, 2, 12, 0, 0)


def make_event(from_team="A", to_team="X", t=0, payload_hash=None, svc="svc", byte_hist=None,
               inst_hist=None):
    """Small event factory; ``t`` is seconds after a fixed origin."""
    if payload_hash is None:
        payload_hash = "0" * 32
    elif len(payload_hash) != 32:
        payload_hash = payload_hash.encode().hex().ljust(32, "0")[:32]
    return AttackEvent(
        time=T0 + timedelta(seconds=t),
        from_team=from_team,
        to_team=to_team,
        svc=svc,
        payload_hash=payload_hash,
        byte_hist=byte_hist if byte_hist is not None else {0x41: 4},
        inst_hist=inst_hist if inst_hist is not None else {"mov": 1},
    )


@pytest.fixture
def event_factory():
    return make_event


# -- acceptance bookkeeping -------------------------------------------------

_criteria: dict[int, list[str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    crit = marker.args[0]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.skipped:
            _criteria.setdefault(crit, []).append("SKIP")
        else:
            _criteria.setdefault(crit, []).append("PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_criteria):
        results = _criteria[crit]
        if "FAIL" in results:
            verdict = "FAIL"
        elif all(r == "SKIP" for r in results):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"ACCEPTANCE criterion {crit}: {verdict}")
