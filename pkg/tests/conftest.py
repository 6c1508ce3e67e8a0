import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion and fail on any miss."""

    def record(number, checks):
        ok = all(passed for passed, _ in checks)
        detail = "; ".join(text for _, text in checks)
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        _LINES.append(line)
        print(line)
        failed = [text for passed, text in checks if not passed]
        assert not failed, "; ".join(failed)

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
