import pytest

from acceptance_report import RESULTS


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
