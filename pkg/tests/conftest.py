import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# verdict lines collected by test_acceptance.py, replayed after the run so
# they survive pytest's output capture
ACCEPTANCE_VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)
