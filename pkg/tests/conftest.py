import pytest

# criterion number -> (passed, summary line); filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, line = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {line}")


@pytest.fixture
def record():
    def _record(key: int, ok: bool, line: str):
        ACCEPTANCE[key] = (bool(ok), line)
    return _record
