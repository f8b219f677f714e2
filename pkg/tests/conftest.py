import pytest

# (criterion number, title, passed, detail) collected by the acceptance suite
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test body decides pass or fail."""

    def record(n: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE.append((n, title, bool(ok), detail))
        assert ok, f"criterion {n} ({title}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, ok, detail in sorted(ACCEPTANCE):
        tail = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {n}. {title}{tail}")
