import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)$", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.skipped:
        _CRITERIA[n] = "SKIP"
    elif report.failed:
        _CRITERIA[n] = "FAIL"
    elif report.when == "call" and n not in _CRITERIA:
        _CRITERIA[n] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {n:>2}: {_CRITERIA[n]:<4}  {CRITERIA[n]}")
