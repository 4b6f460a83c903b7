"""Brute-force search over code parameter candidates {K, C, Omega}.

Each candidate is scored by the mismatch of its optimal integer split; the
first candidate attaining the minimum wins.  Candidates that fail to solve
are excluded with a warning instead of aborting the search.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

from .analytics import mismatch
from .errors import CodedStreamError, InvalidArgumentError, NumericalFailureError
from .loadsplit import LoadSplit, SplitConfig, optimal_split, total_task_count
from .stochastic import WorkerProfile


@dataclass(frozen=True)
class CodeParams:
    """One candidate code: K critical tasks, C operations/task, redundancy Omega.

    ``product`` tags a fixed total workload Z = K*C when the candidate came
    from a Z-constrained enumeration.
    """

    critical: int
    complexity: float
    redundancy: float
    product: float | None = None

    def __post_init__(self):
        if self.critical < 1:
            raise InvalidArgumentError("K must be >= 1")
        if self.complexity <= 0:
            raise InvalidArgumentError("C must be > 0")
        if self.redundancy < 1.0:
            raise InvalidArgumentError("Omega must be >= 1")
        if self.product is not None:
            # C = Z/K is computed in floats, so hold the tag to one part in 1e12
            if abs(self.critical * self.complexity - self.product) > 1e-12 * abs(self.product):
                raise InvalidArgumentError(
                    f"K*C = {self.critical * self.complexity} != declared product {self.product}"
                )

    @property
    def total_tasks(self) -> int:
        return total_task_count(self.critical, self.redundancy)


@dataclass(frozen=True)
class CandidateRow:
    """One row of the per-candidate search table."""

    critical: int
    complexity: float
    redundancy: float
    theta: float
    active_workers: int
    mismatch: float


@dataclass(frozen=True)
class CodeSearchResult:
    """Search outcome: winning candidate, its split, and the full table."""

    best: CodeParams
    best_split: LoadSplit
    best_mismatch: float
    table: tuple[CandidateRow, ...]
    excluded: tuple[tuple[CodeParams, str], ...] = ()


def enumerate_candidates(
    k_values: Sequence[int] | None = None,
    k_range: tuple[int, int, int] | None = None,
    product: float | None = None,
    complexity: float | None = None,
    redundancy: float = 1.0,
    explicit: Sequence[CodeParams] | None = None,
) -> list[CodeParams]:
    """Expand a candidate description into a concrete list.

    Either pass ``explicit`` candidates through, or give K values (a list or
    an inclusive (start, stop, step) range) plus one of ``product`` (fixed
    Z = K*C, so C = Z/K) or a shared ``complexity``.
    """
    if explicit is not None:
        out = list(explicit)
        if not out:
            raise InvalidArgumentError("empty candidate list")
        return out
    if k_values is None:
        if k_range is None:
            raise InvalidArgumentError("need k_values, k_range, or explicit candidates")
        start, stop, step = k_range
        if step < 1 or stop < start:
            raise InvalidArgumentError(f"bad K range {k_range}")
        k_values = range(start, stop + 1, step)
    ks = [int(k) for k in k_values]
    if not ks:
        raise InvalidArgumentError("empty candidate list")
    if product is not None:
        return [CodeParams(k, product / k, redundancy, product) for k in ks]
    if complexity is None:
        raise InvalidArgumentError("need a product Z or a shared complexity C")
    return [CodeParams(k, complexity, redundancy) for k in ks]


def optimize_code(
    workers: Sequence[WorkerProfile],
    candidates: Sequence[CodeParams],
    gamma: float,
    tolerance: float = 1e-10,
) -> CodeSearchResult:
    """Score every candidate's optimal integer split; strict < keeps the first minimum."""
    if not candidates:
        raise InvalidArgumentError("need at least one candidate")
    table: list[CandidateRow] = []
    excluded: list[tuple[CodeParams, str]] = []
    best = None
    for cand in candidates:
        try:
            cfg = SplitConfig(cand.total_tasks, gamma, tolerance)
            split = optimal_split(workers, cand.complexity, cfg)
            score = mismatch(split, workers, cand.complexity, gamma)
        except CodedStreamError as exc:
            warnings.warn(f"candidate K={cand.critical} excluded: {exc}", stacklevel=2)
            excluded.append((cand, str(exc)))
            continue
        table.append(
            CandidateRow(
                cand.critical,
                cand.complexity,
                cand.redundancy,
                split.theta,
                len(split.active_set),
                score,
            )
        )
        if best is None or score < best[2]:
            best = (cand, split, score)
    if best is None:
        raise NumericalFailureError("every candidate failed; nothing to rank")
    return CodeSearchResult(best[0], best[1], best[2], tuple(table), tuple(excluded))
