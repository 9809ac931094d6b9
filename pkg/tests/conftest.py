"""Shared fixtures and the acceptance summary hook."""
import numpy as np
import pytest

ACCEPTANCE_RESULTS = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((number, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status} ({detail})")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
