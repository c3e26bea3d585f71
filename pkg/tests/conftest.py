import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, title, passed, detail, seconds)."""
    def record(number, title, passed, detail, seconds):
        line = f"{'PASS' if passed else 'FAIL'}  [{number}] {title}: {detail} ({seconds:.2f} s)"
        _CRITERIA[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
