import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert it."""

    def check(label, passed, detail):
        _ACCEPTANCE.append((label, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'} [{label}] {detail}")
        assert passed, f"[{label}] {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} [{label}] {detail}")
