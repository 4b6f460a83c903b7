"""Command-line front end.

Subcommands: split, analyze, simulate, sweep-omega, optimize-code,
validate-code.  Every run reads one JSON config (--config); --seed, --jobs
and --purging override the config; --out names a directory receiving the
CSV outputs (summary.csv always, delays.csv/trace.csv/candidates.csv per
command).  Exit codes: 0 success, 2 bad config or arguments, 3 computation
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import math
import os
import sys

import numpy as np

from . import analytics, kernels
from .codeopt import CodeParams, enumerate_candidates, optimize_code
from .config import ExperimentConfig, load_config
from .errors import (
    CodedStreamError,
    ConfigError,
    DegenerateWorkerError,
    InvalidArgumentError,
)
from .gradcode import (
    coded_aggregate,
    decode_coefficients,
    fractional_repetition_code,
    load_matrix_csv,
    save_matrix_csv,
    validate_code,
)
from .loadsplit import SplitConfig, optimal_split, total_task_count, uniform_split
from .simulator import (
    SimConfig,
    delay_statistics,
    run_simulation,
    write_delays_csv,
    write_trace_csv,
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _vec(values) -> str:
    return " ".join(_fmt(v) for v in values)


def _write_rows(path: str, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


def _summary(out: str | None, rows: list[tuple[str, object]]) -> None:
    if out is None:
        return
    _write_rows(os.path.join(out, "summary.csv"), "key,value", rows)


def _resolve_split(cfg: ExperimentConfig):
    """(name, integer loads, LoadSplit or None) for the configured split kind."""
    critical, complexity, redundancy = cfg.require_code()
    total = total_task_count(critical, redundancy)
    if cfg.split_kind == "optimal":
        split = optimal_split(
            cfg.workers, complexity, SplitConfig(total, cfg.gamma)
        )
        return "optimal", np.asarray(split.kappa_int), split
    if cfg.split_kind == "uniform":
        return "uniform", uniform_split(len(cfg.workers), total), None
    loads = np.asarray(cfg.explicit_loads, dtype=np.int64)
    if len(loads) != len(cfg.workers):
        raise ConfigError(
            f"split.loads has {len(loads)} entries for {len(cfg.workers)} workers"
        )
    if int(loads.sum()) != total:
        raise ConfigError(
            f"split.loads sums to {int(loads.sum())}, but round(K*Omega) = {total}"
        )
    return "explicit", loads, None


def _sim_config(cfg: ExperimentConfig, loads, record_trace: bool | None = None) -> SimConfig:
    critical, complexity, redundancy = cfg.require_code()
    return SimConfig(
        workers=cfg.workers,
        arrival=cfg.require_arrival(),
        split=tuple(int(k) for k in loads),
        critical=critical,
        complexity=complexity,
        iterations=cfg.iterations,
        n_jobs=cfg.jobs,
        purging=cfg.purging,
        seed=cfg.seed,
        record_trace=cfg.record_trace if record_trace is None else record_trace,
    )


def cmd_split(cfg: ExperimentConfig, out: str | None) -> int:
    critical, complexity, redundancy = cfg.require_code()
    total = total_task_count(critical, redundancy)
    split = optimal_split(cfg.workers, complexity, SplitConfig(total, cfg.gamma))
    uniform = uniform_split(len(cfg.workers), total)
    mm_opt = analytics.mismatch(split, cfg.workers, complexity, cfg.gamma)
    mm_uni = analytics.mismatch(uniform, cfg.workers, complexity, cfg.gamma)

    print(f"total tasks per iteration: {total} (K={critical}, Omega={_fmt(redundancy)})")
    print(f"theta = {_fmt(split.theta)}")
    print(f"active workers: {len(split.active_set)} of {len(cfg.workers)}")
    print("worker  kappa_real        kappa_int  kappa_uniform")
    for i, w in enumerate(cfg.workers):
        print(
            f"{w.id:6d}  {split.kappa_real[i]:<16.6f}  {int(split.kappa_int[i]):9d}"
            f"  {int(uniform[i]):13d}"
        )
    print(f"mismatch optimal  = {_fmt(mm_opt)}")
    print(f"mismatch uniform  = {_fmt(mm_uni)}")
    _summary(
        out,
        [
            ("total_tasks", total),
            ("theta", split.theta),
            ("active_set", _vec(split.active_set)),
            ("kappa_real", _vec(split.kappa_real)),
            ("kappa_int", _vec(split.kappa_int)),
            ("kappa_uniform", _vec(uniform)),
            ("mismatch_optimal", mm_opt),
            ("mismatch_uniform", mm_uni),
        ],
    )
    return 0


def cmd_analyze(cfg: ExperimentConfig, out: str | None) -> int:
    critical, complexity, _ = cfg.require_code()
    arrival = cfg.require_arrival()
    name, loads, _split = _resolve_split(cfg)
    itr = analytics.iteration_moments(loads, cfg.workers, complexity)
    s_mean, s_second = analytics.service_moments(itr, cfg.iterations)
    stats = analytics.queue_stats(s_mean, s_second, arrival)
    bound = analytics.lower_bound(cfg.workers, complexity, critical, cfg.iterations)
    mm = analytics.mismatch(loads, cfg.workers, complexity, cfg.gamma)

    print(f"split: {name} {_vec(loads)}")
    print(f"E[T_itr]  = {_fmt(itr.mean)}")
    print(f"E[T_itr2] = {_fmt(itr.second_moment)}")
    print(f"E[T_s]    = {_fmt(s_mean)}")
    print(f"E[T_s2]   = {_fmt(s_second)}")
    print(f"rho       = {_fmt(stats.rho)}  stable = {_fmt(stats.stable)}")
    print(f"delay (Kingman) = {_fmt(stats.delay_kingman)}")
    print(f"delay (P-K)     = {_fmt(stats.delay_pk)}")
    print(f"lower bound     = {_fmt(bound)}")
    print(f"mismatch        = {_fmt(mm)}")
    _summary(
        out,
        [
            ("split_kind", name),
            ("loads", _vec(loads)),
            ("iteration_mean", itr.mean),
            ("iteration_second_moment", itr.second_moment),
            ("service_mean", s_mean),
            ("service_second_moment", s_second),
            ("rho", stats.rho),
            ("ca2", stats.ca2),
            ("cs2", stats.cs2),
            ("stable", stats.stable),
            ("delay_kingman", stats.delay_kingman),
            ("delay_pk", stats.delay_pk),
            ("lower_bound", bound),
            ("mismatch", mm),
        ],
    )
    return 0


def cmd_simulate(cfg: ExperimentConfig, out: str | None) -> int:
    name, loads, _split = _resolve_split(cfg)
    sim = _sim_config(cfg, loads)
    result = run_simulation(sim)
    mean, second, se = delay_statistics(result)

    print(f"split: {name} {_vec(loads)}")
    print(f"jobs = {sim.n_jobs}, iterations = {sim.iterations}, purging = {_fmt(sim.purging)}")
    print(f"mean delay     = {_fmt(mean)}")
    print(f"second moment  = {_fmt(second)}")
    print(f"std error      = {_fmt(se)}")
    print(f"purged tasks   = {result.purged_tasks}")
    print(f"queue warning  = {_fmt(result.queue_warning)}")
    print(f"backend        = {result.backend}")
    if out is not None:
        write_delays_csv(os.path.join(out, "delays.csv"), result)
        if sim.record_trace:
            write_trace_csv(os.path.join(out, "trace.csv"), result)
    _summary(
        out,
        [
            ("split_kind", name),
            ("loads", _vec(loads)),
            ("jobs", sim.n_jobs),
            ("iterations", sim.iterations),
            ("purging", sim.purging),
            ("seed", sim.seed),
            ("mean_delay", mean),
            ("second_moment", second),
            ("std_error", se),
            ("purged_tasks", result.purged_tasks),
            ("queue_warning", result.queue_warning),
            ("backend", result.backend),
        ],
    )
    return 0


def cmd_sweep_omega(cfg: ExperimentConfig, out: str | None) -> int:
    if cfg.omega_grid is None:
        raise ConfigError("sweep-omega needs an omega_grid")
    critical = cfg.critical
    complexity = cfg.complexity
    if critical is None or complexity is None:
        raise ConfigError("sweep-omega needs code.K and code.C")
    arrival = cfg.require_arrival()
    bound = analytics.lower_bound(cfg.workers, complexity, critical, cfg.iterations)

    header = (
        "Omega,delay_optimal_sim,delay_uniform_sim,delay_theory_nopurge,"
        "lower_bound,optimal_stable,uniform_stable"
    )
    rows = []
    print(header)
    for omega in cfg.omega_grid:
        total = total_task_count(critical, omega)
        split = optimal_split(cfg.workers, complexity, SplitConfig(total, cfg.gamma))
        uniform = uniform_split(len(cfg.workers), total)
        results = {}
        stabilities = {}
        theory = math.nan
        for name, loads in (("optimal", split.kappa_int), ("uniform", uniform)):
            sim = dataclasses.replace(
                _sim_config(cfg, loads, record_trace=False), redundancy=omega
            )
            res = run_simulation(sim)
            results[name] = delay_statistics(res)[0]
            itr = analytics.iteration_moments(loads, cfg.workers, complexity)
            s_mean, s_second = analytics.service_moments(itr, cfg.iterations)
            stabilities[name] = analytics.check_stability(s_mean, arrival)
            if name == "optimal" and stabilities[name]:
                if arrival.is_poisson:
                    theory = analytics.delay_pk(s_mean, s_second, arrival.rate)
                else:
                    theory = analytics.delay_kingman(s_mean, s_second, arrival)
        row = (
            omega,
            results["optimal"],
            results["uniform"],
            theory,
            bound,
            stabilities["optimal"],
            stabilities["uniform"],
        )
        rows.append(row)
        print(",".join(_fmt(v) for v in row))
    if out is not None:
        _write_rows(os.path.join(out, "summary.csv"), header, rows)
    return 0


def cmd_optimize_code(cfg: ExperimentConfig, out: str | None) -> int:
    if cfg.k_values is not None or cfg.k_range is not None:
        candidates = enumerate_candidates(
            k_values=cfg.k_values,
            k_range=cfg.k_range,
            product=cfg.product,
            complexity=cfg.complexity,
            redundancy=cfg.redundancy,
        )
    elif cfg.critical is not None and cfg.complexity is not None:
        candidates = [CodeParams(cfg.critical, cfg.complexity, cfg.redundancy)]
    else:
        raise ConfigError("optimize-code needs code.K_values, code.K_range, or code.K with code.C")
    result = optimize_code(cfg.workers, candidates, cfg.gamma)

    print("K,C,Omega,theta,active_workers,mismatch")
    rows = []
    for row in result.table:
        tup = (
            row.critical,
            row.complexity,
            row.redundancy,
            row.theta,
            row.active_workers,
            row.mismatch,
        )
        rows.append(tup)
        print(",".join(_fmt(v) for v in tup))
    print(
        f"best: K={result.best.critical}, C={_fmt(result.best.complexity)}, "
        f"Omega={_fmt(result.best.redundancy)}, mismatch={_fmt(result.best_mismatch)}"
    )
    for cand, reason in result.excluded:
        print(f"excluded K={cand.critical}: {reason}", file=sys.stderr)
    if out is not None:
        _write_rows(
            os.path.join(out, "candidates.csv"),
            "K,C,Omega,theta,active_workers,mismatch",
            rows,
        )
    _summary(
        out,
        [
            ("best_K", result.best.critical),
            ("best_C", result.best.complexity),
            ("best_Omega", result.best.redundancy),
            ("best_mismatch", result.best_mismatch),
            ("best_theta", result.best_split.theta),
            ("active_workers", len(result.best_split.active_set)),
            ("candidates", len(result.table)),
            ("excluded", len(result.excluded)),
        ],
    )
    return 0


def cmd_validate_code(cfg: ExperimentConfig, out: str | None) -> int:
    if cfg.critical is None:
        raise ConfigError("validate-code needs code.K")
    if cfg.matrix_csv is not None:
        code = load_matrix_csv(cfg.matrix_csv, cfg.critical)
    else:
        if cfg.chunks is None or cfg.chunks_per_task is None:
            raise ConfigError("validate-code needs code.m and code.d (or code.matrix_csv)")
        code = fractional_repetition_code(
            cfg.critical, cfg.redundancy, cfg.chunks, cfg.chunks_per_task
        )
    valid, failing = validate_code(code)
    print(f"tasks = {code.num_tasks}, chunks = {code.num_chunks}, d = {code.chunks_per_task}")
    print(f"decodable from any K={code.critical} rows: {_fmt(valid)}")
    if failing is not None:
        print(f"first failing subset: {_vec(failing)}")

    max_err = None
    if valid:
        rng = np.random.default_rng(cfg.seed)
        gradients = rng.standard_normal((code.num_chunks, 4))
        task_outputs = code.matrix @ gradients
        expected = gradients.sum(axis=0)
        max_err = 0.0
        for subset in itertools.islice(
            itertools.combinations(range(code.num_tasks), code.critical), 5
        ):
            got = coded_aggregate(code, subset, task_outputs[list(subset)])
            err = float(np.max(np.abs(got - expected)))
            max_err = max(max_err, err)
            lam = decode_coefficients(code, subset)
            print(f"subset {_vec(subset)}: coefficients {_vec(lam)} (error {err:.2e})")
    if out is not None:
        save_matrix_csv(os.path.join(out, "matrix.csv"), code)
    _summary(
        out,
        [
            ("tasks", code.num_tasks),
            ("chunks", code.num_chunks),
            ("d", code.chunks_per_task),
            ("K", code.critical),
            ("valid", valid),
            ("failing_subset", "" if failing is None else _vec(failing)),
            ("max_aggregate_error", max_err),
        ],
    )
    return 0


_DISPATCH = {
    "split": cmd_split,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep-omega": cmd_sweep_omega,
    "optimize-code": cmd_optimize_code,
    "validate-code": cmd_validate_code,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codedstream",
        description="Coded-computation load splitting, delay prediction, and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _DISPATCH:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment JSON file")
        p.add_argument("--out", default=None, help="directory for CSV outputs")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--jobs", type=int, default=None, help="override sim.jobs")
        p.add_argument("--purging", choices=("on", "off"), default=None)
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        updates["seed"] = args.seed
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        updates["jobs"] = args.jobs
    if args.purging is not None:
        updates["purging"] = args.purging == "on"
    return dataclasses.replace(cfg, **updates) if updates else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        if args.out is not None:
            os.makedirs(args.out, exist_ok=True)
        return _DISPATCH[args.command](cfg, args.out)
    except DegenerateWorkerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CodedStreamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
