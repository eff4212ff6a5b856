"""Shared pytest plumbing: per-criterion pass/fail lines for the acceptance run."""

import pytest

_CRITERION_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion.

    The line is printed immediately (visible with -s) and repeated in a
    terminal summary section at the end of the run (visible always), so the
    acceptance verdicts survive output capturing.
    """

    def _record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} — {detail}"
        _CRITERION_LINES.append((number, line))
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERION_LINES):
        terminalreporter.write_line(line)
