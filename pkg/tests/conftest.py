import pytest

_LINES = []


class _Recorder:
    def __call__(self, number, name, ok, detail=""):
        tag = "PASS" if ok else "FAIL"
        _LINES.append((number, f"[{tag}] criterion {number}: {name}" + (f" | {detail}" if detail else "")))
        print(_LINES[-1][1])
        return ok


@pytest.fixture(scope="session")
def acceptance():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES, key=lambda x: str(x[0])):
            terminalreporter.write_line(line)
