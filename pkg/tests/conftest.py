"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_RESULTS: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, name = mark.args
    entry = _RESULTS.setdefault(number, {"name": name, "failed": [], "ran": 0})
    if report.when == "call":
        entry["ran"] += 1
        if report.failed:
            entry["failed"].append(item.name)
    elif report.failed:
        entry["failed"].append(f"{item.name} ({report.when})")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        e = _RESULTS[number]
        ok = not e["failed"] and e["ran"] > 0
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {e['name']}"
        if e["failed"]:
            line += "  [failed: " + ", ".join(e["failed"]) + "]"
        tr.write_line(line)
