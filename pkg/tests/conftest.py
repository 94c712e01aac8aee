import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    results = item.config.__dict__.setdefault("_criteria", {})
    key = mark.args[0]
    prev = results.get(key, (mark.args[1], True))
    results[key] = (mark.args[1], prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.__dict__.get("_criteria")
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        title, ok = results[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {title}")
