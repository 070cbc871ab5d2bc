"""Shared test hooks: surface acceptance verdicts in the terminal summary."""


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import ACCEPTANCE_RESULTS

    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
