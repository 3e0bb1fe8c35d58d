import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record the verdict of a numbered acceptance criterion."""
    def record(number, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{text} [{'ok' if passed else 'FAIL'}]" for text, passed in checks)
        _CRITERIA[number] = (ok, detail)
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
