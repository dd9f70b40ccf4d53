import pytest

_ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_log():
    """Record ``(number, ok, title, detail)`` for the end-of-run summary."""

    def record(number, ok, title, detail):
        _ACCEPTANCE_LINES[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {title}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])
