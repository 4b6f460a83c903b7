# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernel.

Scalar-loop twin of _kernel_py: identical keyed-uniform chain
(TASK_STREAM, worker, job, iteration, task_index), identical inverse-CDF
transforms, identical purge semantics.  The backends agree to the last
ulp of the libm calls (numpy's vectorized log1p may round differently
than the scalar one), so cross-backend comparisons use a tight relative
tolerance rather than bit equality.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log1p
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy
from scipy.special.cython_special cimport gammaincinv

cnp.import_array()

BACKEND = "cython"

cdef unsigned long long _GOLDEN = <unsigned long long>0x9E3779B97F4A7C15
cdef unsigned long long _MIX1 = <unsigned long long>0xBF58476D1CE4E5B9
cdef unsigned long long _MIX2 = <unsigned long long>0x94D049BB133111EB
cdef double _INV_2_53 = 1.0 / 9007199254740992.0
cdef unsigned long long _TASK_STREAM = 1


cdef inline unsigned long long _step(unsigned long long h, unsigned long long k) noexcept nogil:
    cdef unsigned long long z = h + _GOLDEN + k
    z ^= z >> 30
    z *= _MIX1
    z ^= z >> 27
    z *= _MIX2
    return z ^ (z >> 31)


cdef inline double _uniform(
    unsigned long long seed,
    unsigned long long p,
    unsigned long long j,
    unsigned long long i,
    unsigned long long t,
) noexcept nogil:
    cdef unsigned long long h = _step(seed, _TASK_STREAM)
    h = _step(h, p)
    h = _step(h, j)
    h = _step(h, i)
    h = _step(h, t)
    return <double>(h >> 11) * _INV_2_53


cdef double _kth_smallest(double* a, Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    """Hoare quickselect, in place: value of rank k (0-based) in a[0:n]."""
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j, mid
    cdef double pivot, tmp
    while lo < hi:
        mid = lo + (hi - lo) // 2
        # median-of-three pivot, ordering a[lo] <= a[mid] <= a[hi]
        if a[mid] < a[lo]:
            tmp = a[mid]; a[mid] = a[lo]; a[lo] = tmp
        if a[hi] < a[lo]:
            tmp = a[hi]; a[hi] = a[lo]; a[lo] = tmp
        if a[hi] < a[mid]:
            tmp = a[hi]; a[hi] = a[mid]; a[mid] = tmp
        pivot = a[mid]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                tmp = a[i]; a[i] = a[j]; a[j] = tmp
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            return a[k]
    return a[lo]


def iteration_durations(
    seed,
    kappa,
    comm,
    family,
    par0,
    par1,
    par2,
    int n_jobs,
    int iterations,
    int critical,
    bint purging,
    bint record_trace,
):
    """Same contract as _kernel_py.iteration_durations."""
    cdef cnp.int64_t[::1] kap = np.ascontiguousarray(kappa, dtype=np.int64)
    cdef double[::1] c = np.ascontiguousarray(comm, dtype=np.float64)
    cdef cnp.int32_t[::1] fam = np.ascontiguousarray(family, dtype=np.int32)
    cdef double[::1] p0 = np.ascontiguousarray(par0, dtype=np.float64)
    cdef double[::1] p1 = np.ascontiguousarray(par1, dtype=np.float64)
    cdef double[::1] p2 = np.ascontiguousarray(par2, dtype=np.float64)
    cdef unsigned long long s = <unsigned long long>(int(seed) & ((1 << 64) - 1))

    cdef Py_ssize_t num_workers = kap.shape[0]
    cdef Py_ssize_t total = 0
    cdef Py_ssize_t p
    for p in range(num_workers):
        total += kap[p]
    if total < 1:
        raise ValueError("no tasks to dispatch: every load is zero")
    if purging and not 1 <= critical <= total:
        raise ValueError(f"critical count {critical} outside [1, {total}]")

    durations_arr = np.empty((n_jobs, iterations))
    completed_arr = np.empty((n_jobs, iterations), dtype=np.int64)
    if record_trace:
        worker_end_arr = np.zeros((n_jobs, iterations, num_workers))
    else:
        worker_end_arr = np.zeros((1, 1, 1))
    cdef double[:, ::1] durations = durations_arr
    cdef cnp.int64_t[:, ::1] completed = completed_arr
    cdef double[:, :, ::1] worker_end = worker_end_arr

    cdef double* scratch = <double*>malloc(total * sizeof(double))
    cdef double* ordered = <double*>malloc(total * sizeof(double))
    if scratch == NULL or ordered == NULL:
        free(scratch)
        free(ordered)
        raise MemoryError()

    cdef Py_ssize_t j, i, t, col, k, cnt
    cdef int f
    cdef double acc, u, kth, mx
    try:
        with nogil:
            for j in range(n_jobs):
                for i in range(iterations):
                    col = 0
                    for p in range(num_workers):
                        k = kap[p]
                        if k == 0:
                            continue
                        acc = c[p]
                        f = fam[p]
                        for t in range(k):
                            u = _uniform(s, p, j, i, t)
                            if f == 0:
                                acc += p0[p]
                            elif f == 1:
                                acc += -log1p(-u) / p0[p]
                            else:
                                acc += p0[p] + p2[p] * gammaincinv(p1[p], u)
                            scratch[col] = acc
                            col += 1
                        if record_trace:
                            worker_end[j, i, p] = acc
                    if purging:
                        memcpy(ordered, scratch, total * sizeof(double))
                        kth = _kth_smallest(ordered, total, critical - 1)
                        cnt = 0
                        for t in range(total):
                            if scratch[t] <= kth:
                                cnt += 1
                        durations[j, i] = kth
                        completed[j, i] = cnt
                        if record_trace:
                            for p in range(num_workers):
                                if worker_end[j, i, p] > kth:
                                    worker_end[j, i, p] = kth
                    else:
                        mx = scratch[0]
                        for t in range(1, total):
                            if scratch[t] > mx:
                                mx = scratch[t]
                        durations[j, i] = mx
                        completed[j, i] = total
    finally:
        free(scratch)
        free(ordered)
    return durations_arr, completed_arr, (worker_end_arr if record_trace else None)
