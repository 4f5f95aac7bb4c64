"""Shared pytest plumbing: collects the one-line acceptance verdicts and
prints them as a dedicated section of the terminal summary (pytest's
fd-level capture would otherwise hide them for passing tests)."""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
