from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE: list = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for rep in _ACCEPTANCE:
        name = rep.nodeid.split("::")[-1]
        detail = dict(rep.user_properties).get("detail", "")
        verdict = "PASS" if rep.passed else "FAIL"
        tr.write_line(f"{verdict}  {name}  ({rep.duration:.2f} s)  {detail}")
