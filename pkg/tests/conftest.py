import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=200, deadline=None)
settings.load_profile("ci")


# Collected pass/fail lines from the acceptance module, echoed at the end of
# the run so the desk-check summary is visible without scrolling.
_acceptance_lines: list[str] = []


def record_acceptance(tag: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {tag}: {status}"
    if detail:
        line += f"  ({detail})"
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance desk checks")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _seeded_rng():
    # tests draw their own generators; this guards against accidental use of
    # the global numpy state somewhere downstream
    np.random.seed(0)
    yield
