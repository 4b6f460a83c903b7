"""Experiment configuration: one JSON file per run.

Top-level keys: ``workers`` (inline array or path to a workers JSON file),
``arrival``, ``code``, ``split``, ``sim``, ``gamma``, ``seed``.  Workers are
``{id, mean_unit_time, second_moment_unit_time, comm_delay}`` or the
exponential shorthand ``{id, mu, comm_delay}``.  Malformed content raises
ConfigError naming the offending entry.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import ConfigError, InvalidArgumentError
from .stochastic import ArrivalModel, WorkerProfile


def _positive_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{where} must be a positive integer, got {value!r}")
    return value


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed, validated experiment inputs."""

    workers: tuple[WorkerProfile, ...]
    arrival: ArrivalModel | None
    gamma: float
    seed: int
    critical: int | None
    complexity: float | None
    redundancy: float
    k_values: tuple[int, ...] | None
    k_range: tuple[int, int, int] | None
    product: float | None
    chunks: int | None
    chunks_per_task: int | None
    matrix_csv: str | None
    omega_grid: tuple[float, ...] | None
    split_kind: str
    explicit_loads: tuple[int, ...] | None
    jobs: int
    iterations: int
    purging: bool
    record_trace: bool

    def require_code(self) -> tuple[int, float, float]:
        """(K, C, Omega) or a ConfigError naming what is missing."""
        if self.critical is None:
            raise ConfigError("code.K is required for this command")
        if self.complexity is None:
            raise ConfigError("code.C is required for this command")
        return self.critical, self.complexity, self.redundancy

    def require_arrival(self) -> ArrivalModel:
        if self.arrival is None:
            raise ConfigError("an arrival model is required for this command")
        return self.arrival


def _parse_workers(obj, base_dir: str) -> tuple[WorkerProfile, ...]:
    if isinstance(obj, str):
        path = obj if os.path.isabs(obj) else os.path.join(base_dir, obj)
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read workers file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"workers file {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, list) or not obj:
        raise ConfigError("workers must be a non-empty array (or a path to one)")
    out = []
    for i, w in enumerate(obj):
        if not isinstance(w, dict):
            raise ConfigError(f"workers[{i}] must be an object")
        wid = w.get("id", i)
        if not isinstance(wid, int) or isinstance(wid, bool):
            raise ConfigError(f"workers[{i}].id must be an integer")
        comm = _number(w.get("comm_delay", 0.0), f"workers[{i}].comm_delay")
        try:
            if "mu" in w:
                out.append(WorkerProfile.exponential(wid, _number(w["mu"], f"workers[{i}].mu"), comm))
            else:
                out.append(
                    WorkerProfile(
                        wid,
                        _number(w.get("mean_unit_time"), f"workers[{i}].mean_unit_time"),
                        _number(
                            w.get("second_moment_unit_time"),
                            f"workers[{i}].second_moment_unit_time",
                        ),
                        comm,
                    )
                )
        except InvalidArgumentError as exc:
            raise ConfigError(f"workers[{i}]: {exc}") from exc
    return tuple(out)


def _parse_arrival(obj) -> ArrivalModel | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise ConfigError("arrival must be an object")
    kind = obj.get("kind", "poisson" if "rate" in obj else None)
    try:
        if kind == "poisson":
            return ArrivalModel.poisson(_number(obj.get("rate"), "arrival.rate"))
        if kind == "general":
            return ArrivalModel.general(
                _number(obj.get("mean"), "arrival.mean"),
                _number(obj.get("second_moment"), "arrival.second_moment"),
            )
    except InvalidArgumentError as exc:
        raise ConfigError(f"arrival: {exc}") from exc
    raise ConfigError(f"arrival.kind must be 'poisson' or 'general', got {kind!r}")


def load_config(path: str) -> ExperimentConfig:
    """Read and validate one experiment file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    if "workers" not in raw:
        raise ConfigError("config needs a workers entry")
    base_dir = os.path.dirname(os.path.abspath(path))
    workers = _parse_workers(raw["workers"], base_dir)
    arrival = _parse_arrival(raw.get("arrival"))

    gamma = _number(raw.get("gamma", 1.0), "gamma")
    if gamma <= 0:
        raise ConfigError(f"gamma must be > 0, got {gamma}")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")

    code = raw.get("code", {})
    if not isinstance(code, dict):
        raise ConfigError("code must be an object")
    critical = None if "K" not in code else _positive_int(code["K"], "code.K")
    complexity = None if "C" not in code else _number(code["C"], "code.C")
    if complexity is not None and complexity <= 0:
        raise ConfigError(f"code.C must be > 0, got {complexity}")
    redundancy = _number(code.get("Omega", 1.0), "code.Omega")
    if redundancy < 1.0:
        raise ConfigError(f"code.Omega must be >= 1, got {redundancy}")
    k_values = None
    if "K_values" in code:
        vals = code["K_values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("code.K_values must be a non-empty array")
        k_values = tuple(_positive_int(v, "code.K_values[*]") for v in vals)
    k_range = None
    if "K_range" in code:
        rng = code["K_range"]
        if not isinstance(rng, list) or len(rng) != 3:
            raise ConfigError("code.K_range must be [start, stop, step]")
        k_range = tuple(_positive_int(v, "code.K_range[*]") for v in rng)
    product = None if "Z" not in code else _number(code["Z"], "code.Z")
    chunks = None if "m" not in code else _positive_int(code["m"], "code.m")
    chunks_per_task = None if "d" not in code else _positive_int(code["d"], "code.d")
    matrix_csv = code.get("matrix_csv")
    if matrix_csv is not None:
        if not isinstance(matrix_csv, str):
            raise ConfigError("code.matrix_csv must be a path string")
        if not os.path.isabs(matrix_csv):
            matrix_csv = os.path.join(base_dir, matrix_csv)
    omega_grid = None
    grid = code.get("omega_grid", raw.get("sim", {}).get("omega_grid"))
    if grid is not None:
        if not isinstance(grid, list) or not grid:
            raise ConfigError("omega_grid must be a non-empty array")
        omega_grid = tuple(_number(v, "omega_grid[*]") for v in grid)
        if any(v < 1.0 for v in omega_grid):
            raise ConfigError("omega_grid values must be >= 1")

    split = raw.get("split", {})
    if not isinstance(split, dict):
        raise ConfigError("split must be an object")
    split_kind = split.get("kind", "optimal")
    if split_kind not in ("optimal", "uniform", "explicit"):
        raise ConfigError(f"split.kind must be optimal|uniform|explicit, got {split_kind!r}")
    explicit_loads = None
    if split_kind == "explicit":
        loads = split.get("loads")
        if not isinstance(loads, list) or not loads:
            raise ConfigError("split.loads must be a non-empty array for explicit splits")
        explicit_loads = tuple(
            v if isinstance(v, int) and not isinstance(v, bool) and v >= 0
            else _raise_load(v)
            for v in loads
        )

    sim = raw.get("sim", {})
    if not isinstance(sim, dict):
        raise ConfigError("sim must be an object")
    jobs = _positive_int(sim.get("jobs", 1000), "sim.jobs")
    iterations = _positive_int(sim.get("iterations", 1), "sim.iterations")
    purging = sim.get("purging", True)
    if not isinstance(purging, bool):
        raise ConfigError("sim.purging must be true or false")
    record_trace = sim.get("record_trace", False)
    if not isinstance(record_trace, bool):
        raise ConfigError("sim.record_trace must be true or false")

    return ExperimentConfig(
        workers=workers,
        arrival=arrival,
        gamma=gamma,
        seed=seed,
        critical=critical,
        complexity=complexity,
        redundancy=redundancy,
        k_values=k_values,
        k_range=k_range,
        product=product,
        chunks=chunks,
        chunks_per_task=chunks_per_task,
        matrix_csv=matrix_csv,
        omega_grid=omega_grid,
        split_kind=split_kind,
        explicit_loads=explicit_loads,
        jobs=jobs,
        iterations=iterations,
        purging=purging,
        record_trace=record_trace,
    )


def _raise_load(value):
    raise ConfigError(f"split.loads entries must be nonnegative integers, got {value!r}")
