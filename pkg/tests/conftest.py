"""Echo the acceptance suite's PASS/FAIL lines after capture is released.

Stdout from tests is captured by pytest, so the acceptance tests also
record their one-line verdicts in a module-level list; this hook replays
them in a terminal section where they are always visible.
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for name in ("test_acceptance", "tests.test_acceptance"):
        module = sys.modules.get(name)
        if module is not None and getattr(module, "ACCEPTANCE_LINES", None):
            terminalreporter.section("acceptance criteria")
            for line in module.ACCEPTANCE_LINES:
                terminalreporter.write_line(line)
            break
