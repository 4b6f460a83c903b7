"""Discrete-event simulation of the master/worker job stream.

Jobs arrive at a single master queue and are served FIFO, one at a time.
A job is a fixed number of sequential iterations; each iteration dispatches
the split's tasks to the workers, waits for K results (purging on) or all
results (purging off), and only then may the next iteration start.

The per-iteration randomness is drawn by a swappable kernel (compiled or
numpy); everything downstream of the durations matrix runs here so both
backends share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidArgumentError
from .rng import ARRIVAL_STREAM, TASK_STREAM, CounterStream, keyed_uniform
from .stochastic import (
    FAMILY_DETERMINISTIC,
    FAMILY_EXPONENTIAL,
    ArrivalModel,
    WorkerProfile,
    task_distribution,
)

EVENT_JOB_ARRIVAL = "JobArrival"
EVENT_TASK_COMPLETE = "TaskComplete"
EVENT_ITERATION_COMPLETE = "IterationComplete"
EVENT_JOB_COMPLETE = "JobComplete"

_QUEUE_WARNING_FRACTION = 0.1
_EVENT_BUDGET = 200_000
_TRACE_BUDGET = 2_000_000


@dataclass(frozen=True)
class SimConfig:
    """One experiment: workers, arrivals, a concrete integer split, code shape."""

    workers: tuple[WorkerProfile, ...]
    arrival: ArrivalModel
    split: tuple[int, ...]
    critical: int
    complexity: float
    iterations: int
    n_jobs: int
    purging: bool = True
    seed: int = 0
    record_trace: bool = False
    redundancy: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "workers", tuple(self.workers))
        object.__setattr__(self, "split", tuple(int(k) for k in self.split))
        if len(self.split) != len(self.workers):
            raise InvalidArgumentError(
                f"split has {len(self.split)} loads for {len(self.workers)} workers"
            )
        if any(k < 0 for k in self.split):
            raise InvalidArgumentError("loads must be >= 0")
        total = sum(self.split)
        if total < 1:
            raise InvalidArgumentError("split dispatches no tasks")
        if not 1 <= self.critical <= total:
            raise InvalidArgumentError(
                f"critical count {self.critical} outside [1, {total}]"
            )
        if self.complexity <= 0:
            raise InvalidArgumentError("task complexity must be > 0")
        if self.iterations < 1 or self.n_jobs < 1:
            raise InvalidArgumentError("need iterations >= 1 and n_jobs >= 1")
        if self.redundancy is not None:
            expected = int(math.floor(self.critical * self.redundancy + 0.5))
            if expected != total:
                raise InvalidArgumentError(
                    f"split sums to {total}, but round(K*Omega) = {expected}"
                )

    @property
    def total_tasks(self) -> int:
        return sum(self.split)


@dataclass(frozen=True)
class Event:
    """One timeline entry; equal times are ordered by the sequence counter."""

    time: float
    kind: str
    sequence: int
    job: int
    iteration: int = -1
    worker: int = -1


@dataclass(frozen=True)
class BusyInterval:
    """A worker's contiguous busy stretch within one job iteration."""

    worker: int
    job: int
    iteration: int
    start: float
    end: float


@dataclass(frozen=True)
class SimResult:
    """Outcome of one run; immutable and safe to share."""

    arrivals: np.ndarray = field(repr=False)
    completions: np.ndarray = field(repr=False)
    delays: np.ndarray = field(repr=False)
    purged_tasks: int
    queue_warning: bool
    backend: str
    busy_intervals: tuple[BusyInterval, ...] | None = None
    iteration_ends: np.ndarray | None = field(default=None, repr=False)
    iteration_completed: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_jobs(self) -> int:
        return len(self.delays)


def _packed_distributions(config: SimConfig):
    """Per-worker (family, par0, par1, par2) arrays for the kernels."""
    p = len(config.workers)
    family = np.zeros(p, dtype=np.int32)
    par0 = np.zeros(p)
    par1 = np.zeros(p)
    par2 = np.zeros(p)
    for i, w in enumerate(config.workers):
        dist = task_distribution(w, config.complexity)
        family[i] = dist.family
        if dist.family == FAMILY_DETERMINISTIC:
            par0[i] = dist.params[0]
        elif dist.family == FAMILY_EXPONENTIAL:
            par0[i] = dist.params[0]
        else:
            par0[i], par1[i], par2[i] = dist.params
    return family, par0, par1, par2


def arrival_times(config: SimConfig) -> np.ndarray:
    """Job arrival instants: cumulative keyed inter-arrival draws."""
    stream = CounterStream(config.seed, (ARRIVAL_STREAM,))
    inter = config.arrival.inter_arrival_distribution().quantile(
        stream.uniforms(config.n_jobs)
    )
    return np.cumsum(np.asarray(inter, dtype=float))


def run_simulation(config: SimConfig) -> SimResult:
    """Simulate the full stream and measure in-order job delays."""
    kappa = np.asarray(config.split, dtype=np.int64)
    comm = np.array([w.comm_delay for w in config.workers])
    family, par0, par1, par2 = _packed_distributions(config)
    if config.record_trace and config.n_jobs * config.iterations * len(kappa) > _TRACE_BUDGET:
        raise InvalidArgumentError(
            "trace recording is meant for small runs; lower J, iterations, or P"
        )

    durations, completed, worker_end = kernels.iteration_durations(
        config.seed,
        kappa,
        comm,
        family,
        par0,
        par1,
        par2,
        config.n_jobs,
        config.iterations,
        config.critical,
        config.purging,
        config.record_trace,
    )

    arrivals = arrival_times(config)
    service = durations.sum(axis=1)
    starts = np.empty(config.n_jobs)
    completions = np.empty(config.n_jobs)
    prev = -math.inf
    for j in range(config.n_jobs):
        start = arrivals[j] if arrivals[j] > prev else prev
        starts[j] = start
        prev = start + service[j]
        completions[j] = prev
    delays = completions - arrivals

    if config.purging:
        purged = int(config.total_tasks * config.n_jobs * config.iterations - completed.sum())
    else:
        purged = 0
    in_system = int(np.sum(completions[:-1] > arrivals[-1]))
    queue_warning = in_system > _QUEUE_WARNING_FRACTION * config.n_jobs

    busy = None
    iter_ends = None
    if config.record_trace:
        iter_ends = starts[:, None] + np.cumsum(durations, axis=1)
        iter_starts = iter_ends - durations
        busy = tuple(
            BusyInterval(
                p,
                j,
                i,
                float(iter_starts[j, i]),
                float(iter_starts[j, i] + worker_end[j, i, p]),
            )
            for j in range(config.n_jobs)
            for i in range(config.iterations)
            for p in range(len(kappa))
            if kappa[p] > 0
        )
    return SimResult(
        arrivals=arrivals,
        completions=completions,
        delays=delays,
        purged_tasks=purged,
        queue_warning=queue_warning,
        backend=kernels.BACKEND,
        busy_intervals=busy,
        iteration_ends=iter_ends,
        iteration_completed=completed if config.record_trace else None,
    )


def compare_splits(
    config: SimConfig, splits: dict[str, Sequence[int]]
) -> dict[str, SimResult]:
    """Run each named split under the same seed (common random numbers).

    Overlapping task indices consume identical draws, so split comparisons
    are paired rather than independent.
    """
    if not splits:
        raise InvalidArgumentError("need at least one split")
    out = {}
    for name, split in splits.items():
        cfg = SimConfig(
            workers=config.workers,
            arrival=config.arrival,
            split=tuple(int(k) for k in split),
            critical=config.critical,
            complexity=config.complexity,
            iterations=config.iterations,
            n_jobs=config.n_jobs,
            purging=config.purging,
            seed=config.seed,
            record_trace=config.record_trace,
        )
        out[name] = run_simulation(cfg)
    return out


def delay_statistics(result: SimResult) -> tuple[float, float, float]:
    """Sample mean, second moment, and standard error of the job delays."""
    delays = result.delays
    if len(delays) == 0:
        raise InvalidArgumentError("no completed jobs")
    mean = float(delays.mean())
    second = float(np.mean(delays**2))
    if len(delays) < 2:
        return mean, second, 0.0
    se = float(delays.std(ddof=1) / math.sqrt(len(delays)))
    return mean, second, se


def build_events(config: SimConfig) -> list[Event]:
    """Full event timeline for small runs, rebuilt in pure Python.

    Uses the same keyed draws as the kernels, so the timeline is exactly
    the simulated one.  Purged tasks emit no TaskComplete event.
    """
    if config.n_jobs * config.iterations * config.total_tasks > _EVENT_BUDGET:
        raise InvalidArgumentError("event timelines are meant for small runs")
    dists = [task_distribution(w, config.complexity) for w in config.workers]
    arrivals = arrival_times(config)
    events: list[Event] = []
    seq = 0

    def emit(time, kind, job, iteration=-1, worker=-1):
        nonlocal seq
        events.append(Event(float(time), kind, seq, job, iteration, worker))
        seq += 1

    prev = -math.inf
    for j in range(config.n_jobs):
        emit(arrivals[j], EVENT_JOB_ARRIVAL, j)
        t = arrivals[j] if arrivals[j] > prev else prev
        for i in range(config.iterations):
            finish_times = []  # (time, worker)
            for p, kap in enumerate(config.split):
                if kap == 0:
                    continue
                acc = t + config.workers[p].comm_delay
                for idx in range(kap):
                    u = keyed_uniform(config.seed, TASK_STREAM, p, j, i, idx)
                    acc += float(dists[p].quantile(u))
                    finish_times.append((acc, p))
            times = np.array([ft[0] for ft in finish_times])
            if config.purging:
                end = float(np.partition(times, config.critical - 1)[config.critical - 1])
            else:
                end = float(times.max())
            for time, p in finish_times:
                if time <= end:
                    emit(time, EVENT_TASK_COMPLETE, j, i, p)
            emit(end, EVENT_ITERATION_COMPLETE, j, i)
            t = end
        emit(t, EVENT_JOB_COMPLETE, j)
        prev = t
    events.sort(key=lambda e: (e.time, e.sequence))
    return events


def write_delays_csv(path, result: SimResult) -> None:
    """Per-job rows: job_index, arrival_time, completion_time, delay."""
    with open(path, "w") as fh:
        fh.write("job_index,arrival_time,completion_time,delay\n")
        for j in range(result.n_jobs):
            fh.write(
                f"{j},{float(result.arrivals[j])!r},"
                f"{float(result.completions[j])!r},{float(result.delays[j])!r}\n"
            )


def write_trace_csv(path, result: SimResult) -> None:
    """Busy/idle transition rows: time, worker, state, job, iteration."""
    if result.busy_intervals is None:
        raise InvalidArgumentError("run with record_trace=True to export a trace")
    rows = []
    for iv in result.busy_intervals:
        rows.append((iv.start, iv.worker, 1, iv.job, iv.iteration))
        rows.append((iv.end, iv.worker, 0, iv.job, iv.iteration))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    with open(path, "w") as fh:
        fh.write("time,worker,state,job,iteration\n")
        for time, worker, s, job, iteration in rows:
            state = "busy" if s else "idle"
            fh.write(f"{time!r},{worker},{state},{job},{iteration}\n")
