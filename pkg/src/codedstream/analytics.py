"""Queueing predictions for the stream of coded jobs.

The iteration time is the max over active workers of their assignment
completion times, so its CDF is a product of per-worker CDFs.  Moments come
from adaptive quadrature of the survival function; job service moments,
stability, and the Kingman / Pollaczek-Khinchin delay formulas follow in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import integrate

from .errors import InvalidArgumentError, NumericalFailureError, UnstableSystemError
from .loadsplit import LoadSplit
from .special import reg_lower_gamma
from .stochastic import (
    FAMILY_DETERMINISTIC,
    FAMILY_SHIFTED_GAMMA,
    ArrivalModel,
    WorkerProfile,
    assignment_moments,
    scale_moments,
    task_distribution,
)

_SURVIVAL_TOL = 1e-12
_REL_TOL = 1e-8
_MAX_RANGE_DOUBLINGS = 200

SplitLike = Union[LoadSplit, Sequence[int], np.ndarray]


@dataclass(frozen=True)
class IterationMoments:
    """First two moments of the iteration time."""

    mean: float
    second_moment: float

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2


@dataclass(frozen=True)
class QueueStats:
    """Service moments plus the derived queueing picture for one configuration.

    ``delay_kingman`` is None when the queue is unstable; ``delay_pk`` is
    additionally None for non-Poisson arrivals, where the formula is not
    exact.
    """

    service_mean: float
    service_second_moment: float
    arrival_mean: float
    rho: float
    ca2: float
    cs2: float
    stable: bool
    delay_kingman: float | None
    delay_pk: float | None


def _integer_kappa(split: SplitLike) -> np.ndarray:
    if isinstance(split, LoadSplit):
        return np.asarray(split.kappa_int, dtype=np.int64)
    kappa = np.asarray(split, dtype=float)
    if np.any(kappa < 0):
        raise InvalidArgumentError("loads must be >= 0")
    rounded = np.rint(kappa)
    if np.any(np.abs(kappa - rounded) > 1e-9):
        raise InvalidArgumentError("iteration-time analytics needs an integer split")
    return rounded.astype(np.int64)


class _AssignmentCdf:
    """CDF of one worker's assignment completion time.

    Sums of the task families stay closed under convolution: kappa
    deterministic tasks give a point mass, kappa gamma tasks give a gamma
    with kappa-fold shape.  The comm delay shifts the origin.
    """

    __slots__ = ("origin", "shape", "scale", "point")

    def __init__(self, worker: WorkerProfile, complexity: float, kappa: int):
        dist = task_distribution(worker, complexity)
        if dist.family == FAMILY_DETERMINISTIC:
            self.point = worker.comm_delay + kappa * dist.params[0]
            self.origin = self.shape = self.scale = 0.0
            return
        self.point = None
        if dist.family == FAMILY_SHIFTED_GAMMA:
            shift, shape, scale = dist.params
        else:  # exponential: gamma with unit shape
            shift, shape, scale = 0.0, 1.0, 1.0 / dist.params[0]
        self.origin = worker.comm_delay + kappa * shift
        self.shape = kappa * shape
        self.scale = scale

    def value(self, t: float) -> float:
        if self.point is not None:
            return 1.0 if t >= self.point else 0.0
        return reg_lower_gamma(self.shape, (t - self.origin) / self.scale)

    def mean(self) -> float:
        if self.point is not None:
            return self.point
        return self.origin + self.shape * self.scale

    def spread(self) -> float:
        if self.point is not None:
            return 0.0
        return math.sqrt(self.shape) * self.scale

    def breakpoint(self) -> float:
        return self.point if self.point is not None else self.origin


def _active_cdfs(
    split: SplitLike, workers: Sequence[WorkerProfile], complexity: float
) -> list[_AssignmentCdf]:
    kappa = _integer_kappa(split)
    if len(kappa) != len(workers):
        raise InvalidArgumentError(
            f"split has {len(kappa)} loads for {len(workers)} workers"
        )
    cdfs = [
        _AssignmentCdf(w, complexity, int(k))
        for w, k in zip(workers, kappa)
        if k > 0
    ]
    if not cdfs:
        raise InvalidArgumentError("no active workers: every load is zero")
    return cdfs


def iteration_cdf(
    split: SplitLike, workers: Sequence[WorkerProfile], complexity: float, t: float
) -> float:
    """P[T_itr <= t]: product of active workers' assignment CDFs."""
    if t < 0:
        return 0.0
    prob = 1.0
    for cdf in _active_cdfs(split, workers, complexity):
        prob *= cdf.value(t)
        if prob == 0.0:
            return 0.0
    return min(prob, 1.0)


def iteration_moments(
    split: SplitLike, workers: Sequence[WorkerProfile], complexity: float
) -> IterationMoments:
    """E[T_itr] and E[T_itr^2] by quadrature of the survival function.

    E[T] = int_0^inf (1 - F(t)) dt and E[T^2] = int_0^inf 2t(1 - F(t)) dt
    for a nonnegative variable.  The upper limit is pushed out until the
    survival probability drops below 1e-12.
    """
    cdfs = _active_cdfs(split, workers, complexity)

    def survival(t: float) -> float:
        prob = 1.0
        for cdf in cdfs:
            prob *= cdf.value(t)
            if prob == 0.0:
                return 1.0
        return 1.0 - prob

    t_max = max(c.mean() + 10.0 * c.spread() for c in cdfs)
    t_max = max(t_max, max(c.breakpoint() for c in cdfs))
    for _ in range(_MAX_RANGE_DOUBLINGS):
        if survival(t_max) <= _SURVIVAL_TOL:
            break
        t_max *= 2.0
    else:
        raise NumericalFailureError(
            f"iteration survival stuck above {_SURVIVAL_TOL} at t={t_max}"
        )

    points = sorted({c.breakpoint() for c in cdfs if 0.0 < c.breakpoint() < t_max})
    mean = _quad(survival, t_max, points)
    second = _quad(lambda t: 2.0 * t * survival(t), t_max, points)
    return IterationMoments(mean, second)


def _quad(fn, t_max: float, points: list[float]) -> float:
    value, abserr, info, *tail = integrate.quad(
        fn, 0.0, t_max, points=points or None, limit=500, epsrel=_REL_TOL, full_output=1
    )
    if tail and abserr > max(_REL_TOL * abs(value), 1e-10):
        raise NumericalFailureError(f"quadrature failed: {tail[0]}")
    return value


def service_moments(itr: IterationMoments, iterations: int) -> tuple[float, float]:
    """Moments of a job's service time: the sum of ``iterations`` iid iterations."""
    if iterations < 1:
        raise InvalidArgumentError("iterations per job must be >= 1")
    mean = iterations * itr.mean
    second = iterations * itr.second_moment + iterations * (iterations - 1) * itr.mean**2
    return mean, second


def check_stability(service_mean: float, arrival: ArrivalModel) -> bool:
    """Rate stability: mean service strictly below mean inter-arrival time."""
    return service_mean < arrival.mean


def delay_kingman(
    service_mean: float, service_second_moment: float, arrival: ArrivalModel
) -> float:
    """Kingman's G/G/1 approximation of the mean job delay (wait + service)."""
    rho = service_mean / arrival.mean
    if rho >= 1.0:
        raise UnstableSystemError(f"utilization {rho} >= 1")
    ca2 = arrival.variance / arrival.mean**2
    cs2 = (service_second_moment - service_mean**2) / service_mean**2
    wait = (rho / (1.0 - rho)) * 0.5 * (ca2 + cs2) * service_mean
    return service_mean + wait


def delay_pk(service_mean: float, service_second_moment: float, rate: float) -> float:
    """Pollaczek-Khinchin mean delay, exact for Poisson arrivals."""
    if rate <= 0:
        raise InvalidArgumentError("arrival rate must be > 0")
    rho = rate * service_mean
    if rho >= 1.0:
        raise UnstableSystemError(f"utilization {rho} >= 1")
    return service_mean + rate * service_second_moment / (2.0 * (1.0 - rho))


def lower_bound(
    workers: Sequence[WorkerProfile], complexity: float, critical: int, iterations: int
) -> float:
    """Ideal-system bound: one super-worker at the pooled rate, mean comm delay.

    D_L = iterations * ( K / sum_p 1/E[T_p] + mean_p c_p ) where E[T_p] is the
    one-task mean on worker p.  Independent of the redundancy Omega.
    """
    if critical < 1:
        raise InvalidArgumentError("critical task count must be >= 1")
    if iterations < 1:
        raise InvalidArgumentError("iterations per job must be >= 1")
    if not workers:
        raise InvalidArgumentError("need at least one worker")
    pooled_rate = sum(1.0 / scale_moments(w, complexity).mean for w in workers)
    mean_comm = sum(w.comm_delay for w in workers) / len(workers)
    return iterations * (critical / pooled_rate + mean_comm)


def mismatch(
    split: SplitLike, workers: Sequence[WorkerProfile], complexity: float, gamma: float
) -> float:
    """Population variance of the per-worker moment scores.

    The score of worker p is E[T_{p,k_p}] + gamma*E[T_{p,k_p}^2]; workers
    with no load score 0.  Zero variance means a perfectly matched split.
    A LoadSplit is scored on its integer loads; a raw array is scored as
    given, so the real-valued solution can be checked for exact matching.
    """
    if isinstance(split, LoadSplit):
        kappa = np.asarray(split.kappa_int, dtype=float)
    else:
        kappa = np.asarray(split, dtype=float)
        if np.any(kappa < 0):
            raise InvalidArgumentError("loads must be >= 0")
    if len(kappa) != len(workers):
        raise InvalidArgumentError(
            f"split has {len(kappa)} loads for {len(workers)} workers"
        )
    scores = []
    for w, k in zip(workers, kappa):
        first, second = assignment_moments(scale_moments(w, complexity), w.comm_delay, k)
        scores.append(first + gamma * second)
    return float(np.var(scores))


def queue_stats(
    service_mean: float, service_second_moment: float, arrival: ArrivalModel
) -> QueueStats:
    """Assemble the full queueing picture; delays are None when undefined."""
    rho = service_mean / arrival.mean
    ca2 = arrival.variance / arrival.mean**2
    cs2 = (service_second_moment - service_mean**2) / service_mean**2
    stable = check_stability(service_mean, arrival)
    kingman = (
        delay_kingman(service_mean, service_second_moment, arrival) if stable else None
    )
    pk = (
        delay_pk(service_mean, service_second_moment, arrival.rate)
        if stable and arrival.is_poisson
        else None
    )
    return QueueStats(
        service_mean, service_second_moment, arrival.mean, rho, ca2, cs2, stable, kingman, pk
    )
