import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay acceptance verdict lines after output capture ends."""
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None) if module else None
    if not verdicts:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="-")
    for line in verdicts:
        terminalreporter.write_line(line)
