import pytest

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def acceptance_report():
    def report(name: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES[name] = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"

    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0].rstrip("."))):
        terminalreporter.write_line(ACCEPTANCE_LINES[name])
