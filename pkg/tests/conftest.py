"""Shared fixtures and the acceptance-criteria summary hook.

Acceptance tests record one human-readable PASS/FAIL line each via the
``criterion_report`` fixture; the lines are replayed in a dedicated section
after the normal pytest summary so they are visible in plain ``pytest -v``
output (captured stdout of passing tests is normally hidden).
"""

from __future__ import annotations

import numpy as np
import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion_report():
    """Return a recorder: ``record(name, ok, detail)`` emits one summary line."""

    def record(name: str, ok: bool | str, detail: str) -> None:
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        line = f"[{name}] {status} — {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line, flush=True)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    """Factory for seeded generators: ``rng(seed)``."""

    def make(seed: int = 0) -> np.random.Generator:
        return np.random.default_rng(seed)

    return make
