"""Distribution families and moment algebra for task and inter-arrival times.

Workers are described by the first two moments of their unit-complexity task
time plus a fixed per-iteration communication delay.  Scaling a unit task to
complexity ``C`` multiplies the mean by ``C`` and the second moment by
``C**2``; assigning ``kappa`` tasks to a worker adds the communication delay
once and sums ``kappa`` independent task times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincinv

from .errors import InvalidArgumentError
from .rng import CounterStream

# Family codes shared with the simulator kernels.
FAMILY_DETERMINISTIC = 0
FAMILY_EXPONENTIAL = 1
FAMILY_SHIFTED_GAMMA = 2

# Relative tolerances for classifying a moment pair as a named family.
_DET_REL_VAR = 1e-12
_EXP_REL_M2 = 1e-9


@dataclass(frozen=True)
class TaskTimeDistribution:
    """A sampling family for one worker task.

    ``family`` is one of the FAMILY_* codes; ``params`` holds
    (value,) for deterministic, (rate,) for exponential and
    (shift, shape, scale) for shifted gamma.
    """

    family: int
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family == FAMILY_DETERMINISTIC:
            (value,) = self.params
            if value < 0:
                raise InvalidArgumentError("deterministic task time must be >= 0")
        elif self.family == FAMILY_EXPONENTIAL:
            (rate,) = self.params
            if rate <= 0:
                raise InvalidArgumentError("exponential rate must be > 0")
        elif self.family == FAMILY_SHIFTED_GAMMA:
            shift, shape, scale = self.params
            if shift < 0 or shape <= 0 or scale <= 0:
                raise InvalidArgumentError("shifted gamma needs shift >= 0, shape > 0, scale > 0")
        else:
            raise InvalidArgumentError(f"unknown distribution family {self.family}")

    @classmethod
    def deterministic(cls, value: float) -> "TaskTimeDistribution":
        return cls(FAMILY_DETERMINISTIC, (float(value),))

    @classmethod
    def exponential(cls, rate: float) -> "TaskTimeDistribution":
        return cls(FAMILY_EXPONENTIAL, (float(rate),))

    @classmethod
    def shifted_gamma(cls, shift: float, shape: float, scale: float) -> "TaskTimeDistribution":
        return cls(FAMILY_SHIFTED_GAMMA, (float(shift), float(shape), float(scale)))

    @property
    def mean(self) -> float:
        if self.family == FAMILY_DETERMINISTIC:
            return self.params[0]
        if self.family == FAMILY_EXPONENTIAL:
            return 1.0 / self.params[0]
        shift, shape, scale = self.params
        return shift + shape * scale

    @property
    def second_moment(self) -> float:
        if self.family == FAMILY_DETERMINISTIC:
            return self.params[0] ** 2
        if self.family == FAMILY_EXPONENTIAL:
            return 2.0 / self.params[0] ** 2
        shift, shape, scale = self.params
        var = shape * scale**2
        return var + (shift + shape * scale) ** 2

    def quantile(self, u):
        """Inverse CDF, vectorized over ``u`` in [0, 1).

        This is the only sampling path: both simulator kernels apply the
        same transform to the same keyed uniforms.
        """
        if self.family == FAMILY_DETERMINISTIC:
            return np.full_like(np.asarray(u, dtype=float), self.params[0])
        if self.family == FAMILY_EXPONENTIAL:
            return -np.log1p(-np.asarray(u, dtype=float)) / self.params[0]
        shift, shape, scale = self.params
        return shift + scale * gammaincinv(shape, u)


def sample_task_time(dist: TaskTimeDistribution, stream: CounterStream) -> float:
    """Draw one task time from ``dist`` using the given stream."""
    return float(dist.quantile(stream.uniform()))


def sample_task_times(dist: TaskTimeDistribution, stream: CounterStream, n: int) -> np.ndarray:
    """Draw ``n`` task times; consumes ``n`` stream positions."""
    return np.asarray(dist.quantile(stream.uniforms(n)), dtype=float)


@dataclass(frozen=True)
class WorkerProfile:
    """Per-worker stochastic description.

    ``mean_unit_time`` and ``second_moment_unit_time`` are E[U] and E[U^2]
    of the time to finish a complexity-1 task; ``comm_delay`` is the fixed
    communication time charged once per iteration in which the worker
    participates.
    """

    id: int
    mean_unit_time: float
    second_moment_unit_time: float
    comm_delay: float = 0.0

    def __post_init__(self):
        if self.mean_unit_time <= 0:
            raise InvalidArgumentError(f"worker {self.id}: mean unit time must be > 0")
        if self.second_moment_unit_time < self.mean_unit_time**2:
            raise InvalidArgumentError(
                f"worker {self.id}: second moment {self.second_moment_unit_time} "
                f"below squared mean {self.mean_unit_time ** 2}"
            )
        if self.comm_delay < 0:
            raise InvalidArgumentError(f"worker {self.id}: comm delay must be >= 0")

    @classmethod
    def exponential(cls, id: int, mu: float, comm_delay: float = 0.0) -> "WorkerProfile":
        """Shorthand for a worker with U ~ Exp(mu)."""
        if mu <= 0:
            raise InvalidArgumentError(f"worker {id}: mu must be > 0")
        mean = 1.0 / mu
        return cls(id, mean, 2.0 * mean * mean, comm_delay)

    @property
    def unit_variance(self) -> float:
        return self.second_moment_unit_time - self.mean_unit_time**2


@dataclass(frozen=True)
class ScaledTaskMoments:
    """Moments of one complexity-C task: mean, second moment, variance."""

    mean: float
    second_moment: float
    variance: float


def scale_moments(profile: WorkerProfile, complexity: float) -> ScaledTaskMoments:
    """Moments of a complexity-``complexity`` task on this worker."""
    if complexity <= 0:
        raise InvalidArgumentError("task complexity must be > 0")
    mean = complexity * profile.mean_unit_time
    second = complexity**2 * profile.second_moment_unit_time
    return ScaledTaskMoments(mean, second, second - mean**2)


def assignment_moments(
    moments: ScaledTaskMoments, comm_delay: float, kappa: float
) -> tuple[float, float]:
    """First two moments of a ``kappa``-task assignment.

    The assignment time is the communication delay (charged only when
    kappa > 0) plus the sum of ``kappa`` independent task times.  ``kappa``
    may be real-valued; the formulas extend continuously.
    """
    if kappa < 0:
        raise InvalidArgumentError("kappa must be >= 0")
    if kappa == 0:
        return 0.0, 0.0
    m, m2 = moments.mean, moments.second_moment
    first = comm_delay + kappa * m
    second = (
        comm_delay**2
        + 2.0 * kappa * comm_delay * m
        + kappa * m2
        + kappa * (kappa - 1.0) * m * m
    )
    return first, second


def task_distribution(profile: WorkerProfile, complexity: float) -> TaskTimeDistribution:
    """Sampling family matching the worker's scaled task-time moments.

    Zero variance maps to a point mass, a second moment of twice the squared
    mean to an exponential, and anything else to the gamma with the same two
    moments.  Sums of these families stay in closed form, which keeps the
    simulator consistent with the analytic iteration-time model.
    """
    s = scale_moments(profile, complexity)
    if s.variance <= _DET_REL_VAR * s.mean**2:
        return TaskTimeDistribution.deterministic(s.mean)
    if abs(s.second_moment - 2.0 * s.mean**2) <= _EXP_REL_M2 * s.second_moment:
        return TaskTimeDistribution.exponential(1.0 / s.mean)
    shape = s.mean**2 / s.variance
    scale = s.variance / s.mean
    return TaskTimeDistribution.shifted_gamma(0.0, shape, scale)


@dataclass(frozen=True)
class ArrivalModel:
    """Job inter-arrival description: first two moments plus a sampling family."""

    mean: float
    second_moment: float
    family: int
    rate: float | None = None  # set for Poisson arrivals

    def __post_init__(self):
        if self.mean <= 0:
            raise InvalidArgumentError("mean inter-arrival time must be > 0")
        if self.second_moment < self.mean**2:
            raise InvalidArgumentError("inter-arrival second moment below squared mean")

    @classmethod
    def poisson(cls, rate: float) -> "ArrivalModel":
        """Poisson arrivals: E[T_a] = 1/rate, E[T_a^2] = 2/rate^2."""
        if rate <= 0:
            raise InvalidArgumentError("arrival rate must be > 0")
        mean = 1.0 / rate
        return cls(mean, 2.0 * mean * mean, FAMILY_EXPONENTIAL, rate=rate)

    @classmethod
    def general(cls, mean: float, second_moment: float) -> "ArrivalModel":
        """General arrivals given by moments only.

        The delay formulas use just the moments; for simulation the draws
        come from the moment-matched gamma (point mass when the variance is
        zero).
        """
        var = second_moment - mean**2
        if var <= _DET_REL_VAR * mean**2:
            return cls(mean, second_moment, FAMILY_DETERMINISTIC)
        return cls(mean, second_moment, FAMILY_SHIFTED_GAMMA)

    @property
    def is_poisson(self) -> bool:
        return self.rate is not None

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2

    def inter_arrival_distribution(self) -> TaskTimeDistribution:
        """Sampling family for one inter-arrival draw."""
        if self.family == FAMILY_EXPONENTIAL:
            return TaskTimeDistribution.exponential(1.0 / self.mean)
        if self.family == FAMILY_DETERMINISTIC:
            return TaskTimeDistribution.deterministic(self.mean)
        shape = self.mean**2 / self.variance
        scale = self.variance / self.mean
        return TaskTimeDistribution.shifted_gamma(0.0, shape, scale)
