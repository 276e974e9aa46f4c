import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: list[tuple[int, str, str, float]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "SKIP" if rep.skipped else "PASS" if rep.passed else "FAIL"
        line = (mark.args[0], mark.args[1], status, rep.duration)
        _criteria.append(line)
        # visible with -s as the test runs; the summary repeats them
        print(f"\nACCEPTANCE {line[0]:>2} {status}: {line[1]} ({line[3]:.2f}s)")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n, text, status, secs in sorted(_criteria):
        terminalreporter.write_line(f"{status:4} {n:>2}. {text} ({secs:.2f}s)")
