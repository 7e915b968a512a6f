"""Shared pytest hooks.

The acceptance gate prints one ``criterion N: PASS|FAIL - <detail>`` line
per release criterion.  Default capture would hide the lines of passing
criteria, so echo every criterion line in a scoreboard section at the end
of the run.
"""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if getattr(rep, "when", None) != "call":
                continue
            for line in getattr(rep, "capstdout", "").splitlines():
                if line.startswith("criterion "):
                    lines.append(line)
    if lines:
        lines.sort(key=lambda line: int(line.split()[1].rstrip(":")))
        terminalreporter.section("acceptance scoreboard")
        for line in lines:
            terminalreporter.write_line(line)
