"""Shared test configuration: the acceptance-criteria summary block.

Acceptance tests register one line per criterion; the lines are echoed
in the terminal summary so a full run ends with an explicit pass/fail
verdict for each shipped guarantee.
"""

ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def record_acceptance(name: str, outcome: str, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, outcome, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, outcome, detail in ACCEPTANCE_RESULTS:
        suffix = f"  ({detail})" if detail else ""
        tr.write_line(f"[{outcome}] {name}{suffix}")
