"""Shared fixtures plus the acceptance-criteria report.

Acceptance tests record one line each through the ``acceptance_report``
fixture; the lines are printed together at the end of the run so the
pass/fail verdict per criterion is visible even under output capture.
"""

import numpy as np
import pytest

from codedstream import WorkerProfile

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Call with (number, passed, detail); the line prints in the summary."""

    def record(number: int, passed: bool, detail: str) -> bool:
        verdict = "PASS" if passed else "FAIL"
        _ACCEPTANCE_LINES.append(f"criterion {number:2d}: {verdict} - {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def study_workers():
    """The five-worker table used throughout the delay studies.

    Unit task times are Exp(mu_p); the study complexity scales them so one
    task takes C/mu_p seconds on average.
    """
    mu = [5.29e7, 7.26e7, 3.10e7, 1.37e7, 6.03e7]
    comm = [0.0481, 0.0562, 0.0817, 0.0509, 0.0893]
    return tuple(
        WorkerProfile.exponential(p, m, c) for p, (m, c) in enumerate(zip(mu, comm))
    )


STUDY_COMPLEXITY = 2_827_440.0


@pytest.fixture
def study_complexity():
    return STUDY_COMPLEXITY


def random_workers(rng: np.random.Generator, num: int, comm_max: float = 0.2):
    """Heterogeneous exponential workers for property tests."""
    mu = rng.uniform(0.5, 5.0, num)
    comm = rng.uniform(0.0, comm_max, num)
    return tuple(
        WorkerProfile.exponential(p, float(m), float(c))
        for p, (m, c) in enumerate(zip(mu, comm))
    )
