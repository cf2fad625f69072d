import pytest

_RESULTS: list[str] = []


class Criterion:
    """Records one acceptance line and fails the test if the check does not hold."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title

    def check(self, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {self.number:2d}: {self.title}" + (f" ({detail})" if detail else "")
        _RESULTS.append(line)
        print(line)
        assert ok, line


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _RESULTS:
            terminalreporter.write_line(line)
