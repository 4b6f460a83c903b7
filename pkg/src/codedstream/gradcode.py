"""Gradient-coding algebra: encoding matrices, decodability, aggregation.

A code is a sparse N x m matrix B (N tasks over m data chunks, d nonzeros
per row).  It is decodable at threshold K when the all-ones row lies in the
row span of every K-row submatrix, so the full gradient sum can be recovered
from any K finished tasks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ConstructionError,
    DecodeFailureError,
    InvalidArgumentError,
    SubsetBudgetError,
)
from .loadsplit import total_task_count

_RESIDUAL_TOL = 1e-9
_SUBSET_CAP = 1_000_000
_H_SEED = 0x5EED
_MAX_CONSTRUCT_ATTEMPTS = 8
# exhaustive validation inside the constructor is skipped above this count
_CONSTRUCT_VALIDATE_CAP = 100_000


@dataclass(frozen=True)
class GradientCodeParams:
    """Workload shape: n samples in m chunks, d chunks per task, alpha ops/sample."""

    samples: int
    chunks: int
    chunks_per_task: int
    ops_per_sample: float

    def __post_init__(self):
        if self.samples < 1 or self.chunks < 1 or self.chunks_per_task < 1:
            raise InvalidArgumentError("n, m, d must be >= 1")
        if self.ops_per_sample <= 0:
            raise InvalidArgumentError("alpha must be > 0")


def task_complexity(params: GradientCodeParams) -> float:
    """Operations per task: d * alpha * n / m."""
    return (
        params.chunks_per_task
        * params.ops_per_sample
        * params.samples
        / params.chunks
    )


@dataclass(frozen=True)
class GradientCodeMatrix:
    """The encoding matrix plus its decoding threshold.

    ``matrix`` is (N, m); every row must have exactly ``chunks_per_task``
    nonzeros, and fewer nonzeros than columns (a full row needs no code).
    """

    matrix: np.ndarray
    critical: int
    chunks_per_task: int

    def __post_init__(self):
        b = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", b)
        if b.ndim != 2:
            raise InvalidArgumentError("matrix must be 2-dimensional")
        n, m = b.shape
        if not 1 <= self.chunks_per_task < m:
            raise InvalidArgumentError(f"need 1 <= d < m, got d={self.chunks_per_task}, m={m}")
        if not 1 <= self.critical <= n:
            raise InvalidArgumentError(f"need 1 <= K <= {n}, got K={self.critical}")
        per_row = np.count_nonzero(b, axis=1)
        bad = np.flatnonzero(per_row != self.chunks_per_task)
        if bad.size:
            raise InvalidArgumentError(
                f"row {bad[0]} has {per_row[bad[0]]} nonzeros, expected {self.chunks_per_task}"
            )

    @property
    def num_tasks(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_chunks(self) -> int:
        return self.matrix.shape[1]


def _span_residual(rows: np.ndarray) -> tuple[np.ndarray, float]:
    """Min-norm coefficients lam with lam @ rows ~ 1, and the infinity-norm residual."""
    ones = np.ones(rows.shape[1])
    lam, *_ = np.linalg.lstsq(rows.T, ones, rcond=None)
    return lam, float(np.max(np.abs(lam @ rows - ones)))


def validate_code(
    code: GradientCodeMatrix, cap: int = _SUBSET_CAP
) -> tuple[bool, tuple[int, ...] | None]:
    """Exhaustive any-K-rows decodability check.

    Returns (True, None) when every K-subset spans the all-ones row, else
    (False, first_failing_subset) in lexicographic subset order.
    """
    n = code.num_tasks
    k = code.critical
    count = math.comb(n, k)
    if count > cap:
        raise SubsetBudgetError(f"{count} subsets exceed the cap of {cap}")
    for subset in itertools.combinations(range(n), k):
        _, residual = _span_residual(code.matrix[list(subset)])
        if residual > _RESIDUAL_TOL:
            return False, subset
    return True, None


def decode_coefficients(code: GradientCodeMatrix, subset: Sequence[int]) -> np.ndarray:
    """Coefficients lam with lam @ B_S = all-ones, in the order of ``subset``."""
    idx = [int(i) for i in subset]
    if len(idx) != code.critical:
        raise InvalidArgumentError(f"subset size {len(idx)} != K={code.critical}")
    if len(set(idx)) != len(idx):
        raise InvalidArgumentError("subset indices must be distinct")
    if min(idx) < 0 or max(idx) >= code.num_tasks:
        raise InvalidArgumentError("subset index out of range")
    lam, residual = _span_residual(code.matrix[idx])
    if residual > _RESIDUAL_TOL:
        raise DecodeFailureError(
            f"subset {tuple(idx)} does not span the all-ones row (residual {residual:.3e})"
        )
    return lam


def coded_aggregate(
    code: GradientCodeMatrix, subset: Sequence[int], task_results: Sequence
) -> np.ndarray:
    """Recover the chunk-gradient sum from the K task results in ``subset`` order.

    ``task_results[i]`` must be the output of task subset[i], i.e. the
    B[subset[i]]-weighted combination of the chunk gradients.
    """
    results = np.asarray(task_results, dtype=float)
    if results.shape[0] != code.critical:
        raise InvalidArgumentError(
            f"got {results.shape[0]} task results, expected K={code.critical}"
        )
    lam = decode_coefficients(code, subset)
    return lam @ results


def fractional_repetition_code(
    critical: int, redundancy: float, chunks: int, chunks_per_task: int
) -> GradientCodeMatrix:
    """Construct an N x m code with N = round(K*Omega) rows and d nonzeros per row.

    Two layouts are supported.  When d divides m and the m/d disjoint chunk
    blocks divide N evenly, each block is replicated N/(m/d) times with unit
    coefficients; any K rows decode iff they hit every block, which needs
    the replication factor to exceed the straggler count N-K.  Otherwise,
    when N = m and d = N-K+1, rows get cyclic consecutive supports with
    coefficients solved from a seeded dense nullspace, which decodes from
    any K rows.
    """
    n_tasks = total_task_count(critical, redundancy)
    m, d = chunks, chunks_per_task
    if not 1 <= d < m:
        raise ConstructionError(f"need 1 <= d < m, got d={d}, m={m}")
    if (n_tasks * d) % m != 0:
        raise ConstructionError(
            f"N*d = {n_tasks * d} not divisible by m = {m}: no replication layout"
        )
    if m % d == 0 and n_tasks % (m // d) == 0:
        groups = m // d
        replication = n_tasks // groups
        b = np.zeros((n_tasks, m))
        for row in range(n_tasks):
            block = row // replication
            b[row, block * d : (block + 1) * d] = 1.0
        return GradientCodeMatrix(b, critical, d)
    if n_tasks == m and d == n_tasks - critical + 1:
        return _cyclic_code(critical, n_tasks, d)
    raise ConstructionError(
        f"no supported layout for K={critical}, N={n_tasks}, m={m}, d={d}"
    )


def _cyclic_code(critical: int, n_tasks: int, d: int) -> GradientCodeMatrix:
    """Cyclic-support construction: every row of B lies in the nullspace of a
    random dense H with H @ 1 = 0, so any K independent rows span the all-ones row."""
    stragglers = n_tasks - critical
    for attempt in range(_MAX_CONSTRUCT_ATTEMPTS):
        rng = np.random.default_rng(_H_SEED + attempt)
        h = rng.standard_normal((stragglers, n_tasks))
        h[:, -1] = -h[:, :-1].sum(axis=1)
        b = np.zeros((n_tasks, n_tasks))
        ok = True
        for row in range(n_tasks):
            support = (row + np.arange(d)) % n_tasks
            try:
                coeffs = np.linalg.solve(h[:, support[1:]], -h[:, support[0]])
            except np.linalg.LinAlgError:
                ok = False
                break
            if np.any(coeffs == 0.0):
                ok = False
                break
            b[row, support[0]] = 1.0
            b[row, support[1:]] = coeffs
        if not ok:
            continue
        code = GradientCodeMatrix(b, critical, d)
        if math.comb(n_tasks, critical) <= _CONSTRUCT_VALIDATE_CAP:
            valid, _ = validate_code(code)
            if not valid:
                continue
        return code
    raise ConstructionError(
        f"cyclic construction failed after {_MAX_CONSTRUCT_ATTEMPTS} attempts"
    )


def worker_row_blocks(kappa_int: Sequence[int]) -> list[np.ndarray]:
    """Map tasks (matrix rows) onto workers as contiguous blocks by worker index."""
    kappa = np.asarray(kappa_int, dtype=np.int64)
    if np.any(kappa < 0):
        raise InvalidArgumentError("loads must be >= 0")
    stops = np.cumsum(kappa)
    starts = stops - kappa
    return [np.arange(a, b) for a, b in zip(starts, stops)]


def save_matrix_csv(path, code: GradientCodeMatrix) -> None:
    """One row per task, m full-precision columns."""
    with open(path, "w") as fh:
        for row in code.matrix:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_matrix_csv(path, critical: int) -> GradientCodeMatrix:
    """Read a matrix saved by save_matrix_csv; d is inferred from the first row."""
    b = np.loadtxt(path, delimiter=",", ndmin=2)
    d = int(np.count_nonzero(b[0]))
    return GradientCodeMatrix(b, critical, d)
