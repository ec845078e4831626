from collections import defaultdict

import pytest

_criteria = defaultdict(list)

@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _criteria[marker.args[0]].append((item.name, rep.passed))

def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        parts = _criteria[n]
        ok = all(passed for _, passed in parts)
        failed = [name for name, passed in parts if not passed]
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += "  (failing: " + ", ".join(failed) + ")"
        terminalreporter.write_line(line)
