"""Suite wiring: echo acceptance check lines in the terminal summary.

Acceptance tests record one `[acceptance] PASS/FAIL <criterion>` line each
through the `criterion` fixture; the hook below replays them after the
regular pytest summary so the verdict survives output capture.
"""

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
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
