import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion id -> list of (part, passed, detail); filled by the acceptance tests
CRITERIA: dict[int, list[tuple[str, bool, str]]] = {}


def report(criterion: int, part: str, passed: bool, detail: str) -> bool:
    CRITERIA.setdefault(criterion, []).append((part, bool(passed), detail))
    return passed


@pytest.fixture
def record():
    return report


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(CRITERIA):
        parts = CRITERIA[crit]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name}: {'ok' if p else 'FAILED'} ({d})" for name, p, d in parts)
        tr.write_line(f"CRITERION {crit:2d}: {'PASS' if ok else 'FAIL'} | {detail}")
