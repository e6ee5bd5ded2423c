import pytest

_LINES = []


@pytest.fixture
def record():
    """Log one PASS/FAIL line for the acceptance summary; returns ``passed``."""

    def _record(criterion, label, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {label}"
        if detail:
            line += f"  ({detail})"
        _LINES.append(line)
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
