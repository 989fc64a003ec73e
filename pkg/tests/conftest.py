"""Shared pytest wiring for the suite-level acceptance summary.

Tests named ``test_criterion_NN_*`` (see test_acceptance.py) are treated as
acceptance checks.  After the run, the terminal summary prints one PASS/FAIL
line per criterion, including any measured numbers the test recorded via
:func:`record_detail` while it ran.
"""

from __future__ import annotations

import re

_TITLES = {
    1: "command round trip and rejection",
    2: "prediction-match golden table",
    3: "image-op identities and pixel vectors",
    4: "background-removal fixtures",
    5: "indexed search equals brute-force scan",
    6: "gradient verification",
    7: "decoder distribution invariants",
    8: "copy-mechanism accuracy trends",
    9: "dialogue success rate",
    10: "service replay and error contract",
}

_outcomes: dict[int, str] = {}
_details: dict[int, str] = {}

_CRITERION_RE = re.compile(r"test_criterion_(\d+)")


def record_detail(number: int, text: str) -> None:
    """Attach measured numbers to a criterion's summary line."""
    _details[number] = text


def pytest_runtest_logreport(report):
    m = _CRITERION_RE.search(report.nodeid)
    if m is None:
        return
    n = int(m.group(1))
    if report.when == "call":
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            report.outcome, report.outcome.upper()
        )
        if _outcomes.get(n) != "FAIL":
            _outcomes[n] = outcome
    elif report.failed:
        _outcomes[n] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        line = f"[criterion {n:02d}] {_outcomes[n]} — {_TITLES.get(n, 'unknown')}"
        if n in _details:
            line += f": {_details[n]}"
        terminalreporter.write_line(line)
