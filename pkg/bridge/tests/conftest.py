"""Shared test plumbing: collect acceptance outcomes and print one
pass/fail line per criterion at the end of the run."""

ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def record_acceptance(name: str, outcome: str, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, outcome, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in ACCEPTANCE_RESULTS:
        line = f"[{outcome}] {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
