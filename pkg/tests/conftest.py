import pytest

from hitsieve.cli import parse_poly

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def poly():
    return parse_poly


@pytest.fixture
def verdict():
    """Record one acceptance line; printed again in the terminal summary."""

    def record(criterion: int, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
