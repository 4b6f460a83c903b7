"""Benchmark the compiled kernel against the numpy fallback.

Runs the same seeded workloads through both backends, checks they agree,
and prints a timing table.  Usage: python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from codedstream import ArrivalModel, WorkerProfile
from codedstream import _kernel_py
from codedstream.simulator import SimConfig, _packed_distributions

try:
    from codedstream import _kernel_c
except ImportError:
    _kernel_c = None


def _workload(name, workers, split, critical, complexity, jobs, iterations, purging):
    cfg = SimConfig(
        workers=workers,
        arrival=ArrivalModel.poisson(1e-6),
        split=split,
        critical=critical,
        complexity=complexity,
        iterations=iterations,
        n_jobs=jobs,
        purging=purging,
        seed=42,
    )
    kappa = np.asarray(cfg.split, dtype=np.int64)
    comm = np.array([w.comm_delay for w in workers])
    family, p0, p1, p2 = _packed_distributions(cfg)
    args = (42, kappa, comm, family, p0, p1, p2, jobs, iterations, critical, purging, False)
    return name, args


def _time(fn, args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    exp_workers = tuple(
        WorkerProfile.exponential(i, mu, 0.05)
        for i, mu in enumerate([5.29e7, 7.26e7, 3.10e7, 1.37e7, 6.03e7])
    )
    gamma_workers = tuple(
        WorkerProfile(i, 2e-8 * (1 + 0.3 * i), 5.5e-16 * (1 + 0.3 * i) ** 2, 0.02)
        for i in range(8)
    )
    workloads = [
        _workload("exp P=5 J=2000 I=10 purge", exp_workers, (13, 18, 7, 3, 14), 50, 2827440.0, 2000, 10, True),
        _workload("exp P=5 J=2000 I=10 nopurge", exp_workers, (13, 18, 7, 3, 14), 50, 2827440.0, 2000, 10, False),
        _workload("gamma P=8 J=1000 I=20 purge", gamma_workers, (20, 18, 16, 14, 12, 10, 8, 6), 95, 2.5e6, 1000, 20, True),
        _workload("exp P=5 J=20000 I=1 purge", exp_workers, (13, 18, 7, 3, 14), 50, 2827440.0, 20000, 1, True),
    ]

    print(f"{'workload':<32} {'python':>10} {'cython':>10} {'speedup':>8}  agree")
    for name, args in workloads:
        t_py, res_py = _time(_kernel_py.iteration_durations, args)
        if _kernel_c is None:
            print(f"{name:<32} {t_py:>9.3f}s {'n/a':>10} {'-':>8}")
            continue
        t_cy, res_cy = _time(_kernel_c.iteration_durations, args)
        agree = np.allclose(res_py[0], res_cy[0], rtol=1e-12, atol=0.0) and np.array_equal(
            res_py[1], res_cy[1]
        )
        print(f"{name:<32} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>7.2f}x  {agree}")


if __name__ == "__main__":
    main()
