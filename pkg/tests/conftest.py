import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", max_examples=50, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

# filled by tests/test_acceptance.py: {criterion number: [(passed, detail), ...]}
ACCEPTANCE = {}


def record(number: int, passed: bool, detail: str):
    ACCEPTANCE.setdefault(number, []).append((bool(passed), detail))


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
