"""Suite wiring: echo adapter acceptance check lines in the terminal summary."""

from contextlib import contextmanager

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    @contextmanager
    def check(name: str):
        try:
            yield
        except BaseException:
            line = f"[acceptance] FAIL {name}"
            print(line)
            ACCEPTANCE_LINES.append(line)
            raise
        line = f"[acceptance] PASS {name}"
        print(line)
        ACCEPTANCE_LINES.append(line)

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("adapter acceptance")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
