import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # replay the acceptance verdict lines after capture has ended, so they
    # show up in default runs and in teed logs
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICT_LINES", []) if mod else []
    if lines:
        terminalreporter.section("acceptance verdicts")
        for line in lines:
            terminalreporter.write_line(line)
