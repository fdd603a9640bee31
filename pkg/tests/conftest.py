import pytest

_VERDICTS = {}


@pytest.fixture
def verdict():
    """record(number, ok, detail): print and keep one PASS/FAIL line per criterion."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _VERDICTS[number] = line
        return ok
    return record


def pytest_report_header(config):
    from floquet_pt import _kernels
    return f"floquet_pt kernel backend: {_kernels.BACKEND}"


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[key])
