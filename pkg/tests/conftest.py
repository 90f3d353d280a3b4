acceptance_lines: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the per-criterion pass/fail lines after the run, capture or not."""
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
