"""Terminal-summary hook surfacing the trainer acceptance verdicts."""


def pytest_terminal_summary(terminalreporter):
    from trainer_helpers import SECONDARY_RESULTS

    if SECONDARY_RESULTS:
        terminalreporter.section("trainer acceptance criteria")
        for line in SECONDARY_RESULTS:
            terminalreporter.write_line(line)
