"""Load splitting, delay prediction, and simulation for coded job streams.

A master dispatches round(K*Omega) coded tasks per job iteration to
heterogeneous workers and needs any K results back.  This package solves
the optimal per-worker load split, predicts the in-order job delay with
G/G/1 formulas, searches code parameters, handles the gradient-coding
algebra, and validates all of it against a seeded discrete-event simulator.
"""

from .analytics import (
    IterationMoments,
    QueueStats,
    check_stability,
    delay_kingman,
    delay_pk,
    iteration_cdf,
    iteration_moments,
    lower_bound,
    mismatch,
    queue_stats,
    service_moments,
)
from .codeopt import CodeParams, CodeSearchResult, enumerate_candidates, optimize_code
from .config import ExperimentConfig, load_config
from .errors import (
    CodedStreamError,
    ConfigError,
    ConstructionError,
    DecodeFailureError,
    DegenerateWorkerError,
    InvalidArgumentError,
    NumericalFailureError,
    SubsetBudgetError,
    UnstableSystemError,
)
from .gradcode import (
    GradientCodeMatrix,
    GradientCodeParams,
    coded_aggregate,
    decode_coefficients,
    fractional_repetition_code,
    task_complexity,
    validate_code,
    worker_row_blocks,
)
from .kernels import BACKEND, available_backends
from .loadsplit import (
    LoadSplit,
    SplitConfig,
    WorkerCoefficients,
    kappa_of_theta,
    optimal_split,
    quantize,
    solve_theta,
    total_task_count,
    uniform_split,
    worker_coefficients,
)
from .simulator import (
    Event,
    SimConfig,
    SimResult,
    build_events,
    compare_splits,
    delay_statistics,
    run_simulation,
)
from .stochastic import (
    ArrivalModel,
    ScaledTaskMoments,
    TaskTimeDistribution,
    WorkerProfile,
    assignment_moments,
    sample_task_time,
    scale_moments,
    task_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalModel",
    "BACKEND",
    "CodeParams",
    "CodeSearchResult",
    "CodedStreamError",
    "ConfigError",
    "ConstructionError",
    "DecodeFailureError",
    "DegenerateWorkerError",
    "Event",
    "ExperimentConfig",
    "GradientCodeMatrix",
    "GradientCodeParams",
    "InvalidArgumentError",
    "IterationMoments",
    "LoadSplit",
    "NumericalFailureError",
    "QueueStats",
    "ScaledTaskMoments",
    "SimConfig",
    "SimResult",
    "SplitConfig",
    "SubsetBudgetError",
    "TaskTimeDistribution",
    "UnstableSystemError",
    "WorkerCoefficients",
    "WorkerProfile",
    "assignment_moments",
    "available_backends",
    "build_events",
    "check_stability",
    "coded_aggregate",
    "compare_splits",
    "decode_coefficients",
    "delay_kingman",
    "delay_pk",
    "delay_statistics",
    "enumerate_candidates",
    "fractional_repetition_code",
    "iteration_cdf",
    "iteration_moments",
    "kappa_of_theta",
    "load_config",
    "lower_bound",
    "mismatch",
    "optimal_split",
    "optimize_code",
    "quantize",
    "queue_stats",
    "run_simulation",
    "sample_task_time",
    "scale_moments",
    "service_moments",
    "solve_theta",
    "task_complexity",
    "task_distribution",
    "total_task_count",
    "uniform_split",
    "validate_code",
    "worker_coefficients",
    "worker_row_blocks",
]
