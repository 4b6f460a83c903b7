"""Optimal load split across heterogeneous workers.

Every active worker's moment score ``a_p + b_p*kappa_p + gamma*m_p^2*kappa_p^2``
is matched to a common level theta; theta is found by bisection on the
monotone map theta -> sum of per-worker loads, then the real-valued loads are
quantized to integers that sum to the task budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateWorkerError, InvalidArgumentError, NumericalFailureError
from .stochastic import ScaledTaskMoments, WorkerProfile, scale_moments

_MAX_BRACKET_DOUBLINGS = 1024
_MAX_BISECT_ITER = 500


def total_task_count(critical: int, redundancy: float) -> int:
    """Tasks dispatched per iteration: K*Omega rounded half-up."""
    if critical < 1 or redundancy < 1.0:
        raise InvalidArgumentError("need K >= 1 and Omega >= 1")
    return int(np.floor(critical * redundancy + 0.5))


@dataclass(frozen=True)
class SplitConfig:
    """Solver settings: task budget, second-moment weight, stop tolerance."""

    total_tasks: int
    gamma: float = 1.0
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.total_tasks < 1:
            raise InvalidArgumentError("total_tasks must be >= 1")
        if self.gamma <= 0:
            raise InvalidArgumentError("gamma must be > 0")
        if self.tolerance <= 0:
            raise InvalidArgumentError("tolerance must be > 0")


@dataclass(frozen=True)
class WorkerCoefficients:
    """Per-worker quadratic score coefficients: score = a + b*kappa + gamma*m^2*kappa^2."""

    a: float
    b: float
    m: float


@dataclass(frozen=True)
class LoadSplit:
    """A solved split: real and integer loads, matched score level, active set."""

    kappa_real: np.ndarray
    kappa_int: np.ndarray
    theta: float
    active_set: tuple[int, ...]

    @property
    def total(self) -> int:
        return int(self.kappa_int.sum())


def worker_coefficients(
    moments: ScaledTaskMoments, comm_delay: float, gamma: float
) -> WorkerCoefficients:
    """Score coefficients from scaled task moments and the comm delay."""
    a = comm_delay + gamma * comm_delay**2
    b = moments.mean + 2.0 * gamma * comm_delay * moments.mean + gamma * moments.variance
    return WorkerCoefficients(a, b, moments.mean)


def kappa_of_theta(coeff: WorkerCoefficients, theta: float, gamma: float) -> float:
    """Real-valued load putting this worker's score at ``theta``; 0 if a >= theta."""
    if coeff.m <= 0:
        raise DegenerateWorkerError("worker mean task time must be > 0")
    if theta < 0:
        raise InvalidArgumentError("theta must be >= 0")
    surplus = theta - coeff.a
    if surplus <= 0:
        return 0.0
    gm2 = gamma * coeff.m**2
    # (-1 + sqrt(1+x)) rewritten as x / (1 + sqrt(1+x)) to avoid cancellation.
    x = 4.0 * gm2 * surplus / coeff.b**2
    return (coeff.b / (2.0 * gm2)) * (x / (1.0 + np.sqrt(1.0 + x)))


def _sum_kappa(a, b, m, theta, gamma):
    surplus = np.maximum(theta - a, 0.0)
    gm2 = gamma * m * m
    x = 4.0 * gm2 * surplus / (b * b)
    return float(np.sum(b / (2.0 * gm2) * (x / (1.0 + np.sqrt(1.0 + x)))))


def solve_theta(
    coeffs: Sequence[WorkerCoefficients],
    total: float,
    gamma: float,
    tolerance: float = 1e-10,
) -> float:
    """Bisection for the score level where the loads sum to ``total``.

    The load sum is continuous and strictly increasing above min a_p, so the
    root is unique.  The upper bracket starts where the slowest worker would
    hold exactly one task and doubles until the sum exceeds the budget.
    """
    if total < 1:
        raise InvalidArgumentError("total must be >= 1")
    if not coeffs:
        raise InvalidArgumentError("need at least one worker")
    a = np.array([c.a for c in coeffs])
    b = np.array([c.b for c in coeffs])
    m = np.array([c.m for c in coeffs])
    if np.any(m <= 0):
        raise DegenerateWorkerError("worker mean task time must be > 0")

    hi = float(np.max(a + b + gamma * m * m))
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if _sum_kappa(a, b, m, hi, gamma) >= total:
            break
        hi *= 2.0
    else:
        raise NumericalFailureError(f"no upper bracket for theta below {hi}")

    lo = 0.0
    for _ in range(_MAX_BISECT_ITER):
        mid = 0.5 * (lo + hi)
        s = _sum_kappa(a, b, m, mid, gamma)
        if abs(s - total) <= tolerance * total:
            return mid
        if s < total:
            lo = mid
        else:
            hi = mid
    raise NumericalFailureError(
        f"theta bisection stalled: bracket [{lo}, {hi}], load sum {s}, target {total}"
    )


def quantize(kappa_real: Sequence[float], total: int) -> np.ndarray:
    """Largest-remainder rounding to integers that sum exactly to ``total``.

    All loads are floored, then the missing units go to the largest
    fractional parts; equal fractions break toward the lower worker index.
    """
    kappa = np.asarray(kappa_real, dtype=float)
    if np.any(kappa < 0):
        raise InvalidArgumentError("loads must be >= 0")
    if abs(kappa.sum() - total) > max(1e-6 * total, 1e-9):
        raise InvalidArgumentError(
            f"real loads sum to {kappa.sum()}, expected {total}"
        )
    floors = np.floor(kappa).astype(np.int64)
    deficit = int(total - floors.sum())
    if deficit:
        order = np.argsort(-(kappa - floors), kind="stable")
        floors[order[:deficit]] += 1
    return floors


def uniform_split(num_workers: int, total: int) -> np.ndarray:
    """Heterogeneity-oblivious baseline: total/P each, quantized."""
    if num_workers < 1:
        raise InvalidArgumentError("need at least one worker")
    return quantize(np.full(num_workers, total / num_workers), total)


def optimal_split(
    workers: Sequence[WorkerProfile], complexity: float, config: SplitConfig
) -> LoadSplit:
    """Solve the score-matching split for the given workers and task complexity."""
    coeffs = [
        worker_coefficients(scale_moments(w, complexity), w.comm_delay, config.gamma)
        for w in workers
    ]
    theta = solve_theta(coeffs, config.total_tasks, config.gamma, config.tolerance)
    kappa_real = np.array([kappa_of_theta(c, theta, config.gamma) for c in coeffs])
    kappa_int = quantize(kappa_real, config.total_tasks)
    active = tuple(int(i) for i in np.flatnonzero(kappa_real > 0.0))
    return LoadSplit(kappa_real, kappa_int, theta, active)
