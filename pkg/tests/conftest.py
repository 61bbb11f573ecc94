import pytest

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store ``(ok, detail)`` for an acceptance criterion under its label."""

    def _record(label, ok, detail):
        ACCEPTANCE[label] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
