"""Pure-numpy simulation kernel.

Computes per-iteration durations for a stream of jobs.  Iterations are
conditionally independent given the split, so everything is drawn in
vectorized blocks; the queueing (Lindley) recursion lives in simulator.py
and is shared with the compiled backend.

Key layout for task draws, shared verbatim with the compiled kernel:
``(TASK_STREAM, worker, job, iteration, task_index)``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaincinv

from .rng import TASK_STREAM, keyed_uniforms
from .stochastic import FAMILY_DETERMINISTIC, FAMILY_EXPONENTIAL

BACKEND = "python"

# floats per pooled scratch block; bounds memory for huge J*I*N runs
_BLOCK_BUDGET = 4_000_000


def _transform(u: np.ndarray, family: int, p0: float, p1: float, p2: float) -> np.ndarray:
    """Inverse-CDF transform; mirrors TaskTimeDistribution.quantile."""
    if family == FAMILY_DETERMINISTIC:
        return np.full_like(u, p0)
    if family == FAMILY_EXPONENTIAL:
        return -np.log1p(-u) / p0
    return p0 + p2 * gammaincinv(p1, u)


def iteration_durations(
    seed: int,
    kappa: np.ndarray,
    comm: np.ndarray,
    family: np.ndarray,
    par0: np.ndarray,
    par1: np.ndarray,
    par2: np.ndarray,
    n_jobs: int,
    iterations: int,
    critical: int,
    purging: bool,
    record_trace: bool,
):
    """Durations and delivered-result counts for every (job, iteration).

    Returns (durations[J,I], completed[J,I], worker_end[J,I,P] or None);
    worker_end holds each worker's busy-end offset from iteration start,
    already cut at the purge time when purging is on.
    """
    num_workers = len(kappa)
    active = np.flatnonzero(kappa > 0)
    total = int(kappa.sum())
    iters = np.arange(iterations, dtype=np.uint64)[None, :, None]

    durations = np.empty((n_jobs, iterations))
    completed = np.empty((n_jobs, iterations), dtype=np.int64)
    worker_end = np.zeros((n_jobs, iterations, num_workers)) if record_trace else None

    block = max(1, _BLOCK_BUDGET // max(1, iterations * total))
    for j0 in range(0, n_jobs, block):
        j1 = min(n_jobs, j0 + block)
        jobs = np.arange(j0, j1, dtype=np.uint64)[:, None, None]
        pooled = np.empty((j1 - j0, iterations, total))
        col = 0
        for p in active:
            k = int(kappa[p])
            u = keyed_uniforms(
                seed,
                np.uint64(TASK_STREAM),
                np.uint64(p),
                jobs,
                iters,
                np.arange(k, dtype=np.uint64)[None, None, :],
            )
            offsets = comm[p] + np.cumsum(
                _transform(u, int(family[p]), par0[p], par1[p], par2[p]), axis=2
            )
            pooled[:, :, col : col + k] = offsets
            col += k
            if record_trace:
                worker_end[j0:j1, :, p] = offsets[:, :, -1]
        if purging:
            kth = np.partition(pooled, critical - 1, axis=2)[:, :, critical - 1]
            durations[j0:j1] = kth
            completed[j0:j1] = (pooled <= kth[:, :, None]).sum(axis=2)
            if record_trace:
                np.minimum(worker_end[j0:j1], kth[:, :, None], out=worker_end[j0:j1])
        else:
            durations[j0:j1] = pooled.max(axis=2)
            completed[j0:j1] = total
    return durations, completed, worker_end
