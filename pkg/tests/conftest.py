import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def make_rng(seed):
    return np.random.default_rng(seed)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion."""
    entry = {"name": request.node.name, "detail": ""}
    ACCEPTANCE_LINES.append(entry)

    def note(detail):
        entry["detail"] = detail

    yield note
    entry.setdefault("ok", None)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        for entry in ACCEPTANCE_LINES:
            if entry["name"] == item.name:
                entry["ok"] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for entry in ACCEPTANCE_LINES:
        status = "PASS" if entry.get("ok") else "FAIL"
        terminalreporter.write_line(f"{status}  {entry['name']}  {entry['detail']}")
