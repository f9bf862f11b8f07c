import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> list of (test name, outcome, detail)
_ACCEPTANCE: dict[int, list[tuple[str, str, str]]] = {}


@pytest.fixture
def gen():
    return np.random.default_rng(20240611)


@pytest.fixture
def detail(request):
    """Record a measured value next to the acceptance line for this test."""
    def note(text: str) -> None:
        request.node.user_properties.append(("detail", text))
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            status = "FAIL (expected)"
        else:
            status = "PASS" if rep.passed else "FAIL"
        notes = [v for k, v in item.user_properties if k == "detail"] + [f"{rep.duration:.1f}s"]
        text = "; ".join(notes)
        _ACCEPTANCE.setdefault(marker.args[0], []).append((item.name, status, text))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[num]
        ok = all(s == "PASS" for _, s, _ in parts)
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}")
        for name, status, text in parts:
            terminalreporter.write_line(f"    {name}: {status}  [{text}]")
