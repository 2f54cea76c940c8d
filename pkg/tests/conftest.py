import pytest

_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Append one 'PASS|FAIL <criterion>: <detail>' line; shown in the terminal summary."""
    lines = request.config.stash.setdefault(_KEY, [])

    def record(name: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
