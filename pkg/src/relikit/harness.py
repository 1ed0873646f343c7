"""Experiment orchestration: single runs, multi-seed sweeps and method
comparisons over a shared candidate pool."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .engines import RunReport, cov_of_pf, run_engine, true_error_vs_oracle
from .evaluators import SubprocessEvaluator, evaluate_batch
from .reporting import (
    aggregate_rows,
    report_row,
    write_pool_csv,
    write_report_json,
    write_rows_csv,
    write_trace_csv,
)


class ComparisonError(RuntimeError):
    """Methods ended on different candidate pools; comparison refused."""


def default_output_dir(run_cfg: RunConfig | None = None) -> Path:
    if run_cfg is not None and run_cfg.output_dir:
        return Path(run_cfg.output_dir)
    return Path(os.environ.get("RELIKIT_OUTPUT_DIR", "relikit-out"))


def attach_true_error(report: RunReport, g) -> RunReport:
    """Fill ``eps_true`` by evaluating the true model on the final pool.

    The oracle sweep is not counted in ``n_calls``; it exists to measure
    the realized error on the same candidate set the engine used.
    """
    if report.pool is None:
        return report
    g_true = evaluate_batch(g, report.pool.samples)
    pf_oracle = float(np.count_nonzero(g_true <= 0.0)) / report.pool.n
    if pf_oracle <= 0.0:
        report.flags.append("oracle_zero_failures")
        report.eps_true = float("nan")
    else:
        report.eps_true = true_error_vs_oracle(report.pf_hat, pf_oracle)
    return report


def run_single(run_cfg: RunConfig, outdir=None, with_oracle: bool = True) -> tuple[RunReport, dict]:
    """Run one engine and write report JSON plus trace/pool CSVs.

    Returns the report and a dict of written paths.
    """
    outdir = Path(outdir) if outdir is not None else default_output_dir(run_cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    g, rv, bench = run_cfg.make_problem()
    try:
        report = run_engine(g, rv, run_cfg.engine)
        if with_oracle and bench is not None:
            attach_true_error(report, g)
    finally:
        if isinstance(g, SubprocessEvaluator):
            g.close()
    paths = {"report": outdir / f"{run_cfg.label}_report.json", "trace": outdir / f"{run_cfg.label}_trace.csv"}
    write_report_json(paths["report"], report, run_cfg.effective_dict())
    write_trace_csv(paths["trace"], report)
    if report.pool is not None and rv.n_r == 2:
        paths["pool"] = outdir / f"{run_cfg.label}_pool.csv"
        write_pool_csv(paths["pool"], report)
    return report, paths


def _sweep_worker(args) -> dict:
    run_cfg, seed = args
    cfg = run_cfg.with_method(run_cfg.method, seed=seed)
    g, rv, bench = cfg.make_problem()
    try:
        report = run_engine(g, rv, cfg.engine)
        if bench is not None:
            attach_true_error(report, g)
    except Exception as exc:  # recorded per seed, excluded from aggregates
        return {"seed": seed, "method": run_cfg.method, "error": f"{type(exc).__name__}: {exc}"}
    finally:
        if isinstance(g, SubprocessEvaluator):
            g.close()
    report.pool = None  # keep worker results slim
    report.omega2_idx = None
    return report_row(report)


def sweep_seeds(run_cfg: RunConfig, reps: int | None = None) -> list[int]:
    if run_cfg.seeds is not None:
        seeds = list(run_cfg.seeds)
    else:
        r = reps or run_cfg.repetitions
        if r is None or r < 2:
            raise ConfigError("repetitions: sweeps need at least 2 repetitions or an explicit seed list")
        seeds = [run_cfg.engine.seed + i for i in range(r)]
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds: entries must be distinct")
    return seeds


def run_sweep(run_cfg: RunConfig, reps: int | None = None, jobs: int = 1, outdir=None):
    """Independent seeded runs folded into aggregate statistics.

    Rows are produced in seed order regardless of worker scheduling, and
    the per-seed CSV persists everything the aggregates derive from.
    """
    seeds = sweep_seeds(run_cfg, reps)
    tasks = [(run_cfg, s) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_worker, tasks))
    else:
        rows = [_sweep_worker(t) for t in tasks]
    agg = aggregate_rows(rows)
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        write_rows_csv(outdir / f"{run_cfg.label}_seeds.csv", rows)
        import json

        with open(outdir / f"{run_cfg.label}_aggregate.json", "w") as fh:
            json.dump(agg.to_dict(), fh, indent=2)
            fh.write("\n")
    return agg


def compare_methods(run_cfg: RunConfig, methods=("AKMCS", "ISKRA", "REAK")) -> dict:
    """Run the given methods on the identical pool/seed and tabulate them
    against a crude-Monte-Carlo oracle evaluated on that shared pool."""
    g, rv, bench = run_cfg.make_problem()
    reports: list[RunReport] = []
    try:
        for method in methods:
            cfg = run_cfg.with_method(method)
            reports.append(run_engine(g, rv, cfg.engine))
        first = reports[0].pool
        for rep in reports[1:]:
            if rep.pool.n != first.n or not np.array_equal(rep.pool.samples, first.samples):
                raise ComparisonError(
                    "methods finished on different candidate pools "
                    f"({', '.join(f'{r.method}:{r.pool.n}' for r in reports)}); comparison refused"
                )
        g_true = evaluate_batch(g, first.samples)
    finally:
        if isinstance(g, SubprocessEvaluator):
            g.close()
    pf_mcs = float(np.count_nonzero(g_true <= 0.0)) / first.n
    rows = [
        {
            "method": "MCS",
            "n_calls": first.n,
            "n_calls_label": str(first.n),
            "pf_hat": pf_mcs,
            "cov_pf": cov_of_pf(pf_mcs, first.n),
            "eps_max_hat": None,
            "eps_true": None,
            "converged": True,
        }
    ]
    for rep in reports:
        rep.eps_true = true_error_vs_oracle(rep.pf_hat, pf_mcs) if pf_mcs > 0 else float("nan")
        rows.append(
            {
                "method": rep.method,
                "n_calls": rep.n_calls,
                "n_calls_label": rep.n_calls_label,
                "pf_hat": rep.pf_hat,
                "cov_pf": rep.cov_pf,
                "eps_max_hat": rep.eps_max_hat,
                "eps_true": rep.eps_true,
                "converged": rep.converged,
            }
        )
    return {
        "benchmark": run_cfg.benchmark,
        "seed": run_cfg.engine.seed,
        "eps_thr": run_cfg.engine.eps_thr,
        "n_pool": first.n,
        "rows": rows,
    }
