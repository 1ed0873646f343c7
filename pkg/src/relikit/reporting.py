"""Report serialization and aggregate statistics.

Reports serialize to JSON (floats keep full round-trip precision) plus a
flat CSV of the per-iteration trace; two-dimensional problems also emit a
pool scatter CSV for limit-state plots. Sweeps persist one CSV row per
seed so every aggregate is recomputable from disk.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .engines import RunReport, TraceRow

TRACE_COLUMNS = ("iteration", "n_calls", "n_pool", "pf_hat", "max_eff", "alpha", "n_omega2", "eps_max")
POOL_COLUMNS = ("x1", "x2", "density", "pred_mean", "in_esr", "evaluated")
ROW_COLUMNS = (
    "seed",
    "method",
    "n_calls",
    "n_calls_initial",
    "n_calls_adaptive",
    "pf_hat",
    "cov_pf",
    "eps_max_hat",
    "eps_true",
    "n_pool",
    "converged",
    "flags",
    "wall_time",
)


def report_to_dict(report: RunReport, config_echo: dict | None = None) -> dict:
    out = {
        "method": report.method,
        "seed": report.seed,
        "pf_hat": report.pf_hat,
        "cov_pf": report.cov_pf,
        "n_calls": report.n_calls,
        "n_calls_initial": report.n_calls_initial,
        "n_calls_adaptive": report.n_calls_adaptive,
        "n_calls_label": report.n_calls_label,
        "eps_max_hat": report.eps_max_hat,
        "eps_true": report.eps_true,
        "n_pool": report.n_pool,
        "converged": report.converged,
        "flags": list(report.flags),
        "wall_time": report.wall_time,
        "model_info": report.model_info,
        "trace": [
            {
                "iteration": r.iteration,
                "n_calls": r.n_calls,
                "n_pool": r.n_pool,
                "pf_hat": r.pf_hat,
                "max_eff": r.max_eff,
                "alpha": r.alpha,
                "n_omega2": r.n_omega2,
                "eps_max": r.eps_max,
            }
            for r in report.trace
        ],
    }
    if config_echo is not None:
        out["config"] = config_echo
    return out


def report_from_dict(data: dict) -> RunReport:
    trace = [
        TraceRow(
            iteration=r["iteration"],
            n_calls=r["n_calls"],
            n_pool=r["n_pool"],
            pf_hat=r["pf_hat"],
            max_eff=r["max_eff"],
            alpha=r["alpha"],
            n_omega2=r["n_omega2"],
            eps_max=r["eps_max"],
        )
        for r in data["trace"]
    ]
    return RunReport(
        method=data["method"],
        seed=data["seed"],
        pf_hat=data["pf_hat"],
        cov_pf=data["cov_pf"],
        n_calls=data["n_calls"],
        n_calls_initial=data["n_calls_initial"],
        n_calls_adaptive=data["n_calls_adaptive"],
        eps_max_hat=data["eps_max_hat"],
        n_pool=data["n_pool"],
        converged=data["converged"],
        flags=list(data["flags"]),
        trace=trace,
        wall_time=data["wall_time"],
        model_info=data.get("model_info"),
        eps_true=data.get("eps_true"),
    )


def write_report_json(path, report: RunReport, config_echo: dict | None = None):
    with open(path, "w") as fh:
        json.dump(report_to_dict(report, config_echo), fh, indent=2)
        fh.write("\n")


def load_report_json(path) -> RunReport:
    with open(path) as fh:
        return report_from_dict(json.load(fh))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_trace_csv(path, report: RunReport):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in report.trace:
            writer.writerow(
                [_fmt(v) for v in (r.iteration, r.n_calls, r.n_pool, r.pf_hat, r.max_eff, r.alpha, r.n_omega2, r.eps_max)]
            )


def write_pool_csv(path, report: RunReport):
    """Scatter data for two-dimensional problems: final predictions, region
    membership and evaluation markers for every pool point."""
    pool = report.pool
    if pool is None:
        raise ValueError("report holds no pool data")
    if pool.samples.shape[1] != 2:
        raise ValueError("pool scatter output is only defined for 2-D problems")
    in_esr = np.ones(pool.n, dtype=bool)
    if report.omega2_idx is not None:
        in_esr[report.omega2_idx] = False
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POOL_COLUMNS)
        for i in range(pool.n):
            writer.writerow(
                [
                    _fmt(pool.samples[i, 0]),
                    _fmt(pool.samples[i, 1]),
                    _fmt(pool.density[i]),
                    _fmt(pool.pred_mean[i]),
                    _fmt(in_esr[i]),
                    _fmt(pool.evaluated[i]),
                ]
            )


def report_row(report: RunReport) -> dict:
    """Flat per-seed record for sweep persistence."""
    return {
        "seed": report.seed,
        "method": report.method,
        "n_calls": report.n_calls,
        "n_calls_initial": report.n_calls_initial,
        "n_calls_adaptive": report.n_calls_adaptive,
        "pf_hat": report.pf_hat,
        "cov_pf": report.cov_pf,
        "eps_max_hat": report.eps_max_hat,
        "eps_true": report.eps_true,
        "n_pool": report.n_pool,
        "converged": report.converged,
        "flags": ";".join(report.flags),
        "wall_time": report.wall_time,
    }


@dataclass
class AggregateReport:
    """Sweep statistics; every number is recomputable from ``rows``."""

    rows: list[dict]
    n_runs: int
    n_failed: int
    mean_n_calls: float
    cov_n_calls: float
    mean_gap: float | None
    cov_gap: float | None
    coverage: float | None

    def to_dict(self) -> dict:
        return {
            "n_runs": self.n_runs,
            "n_failed": self.n_failed,
            "mean_n_calls": self.mean_n_calls,
            "cov_n_calls": self.cov_n_calls,
            "mean_gap": self.mean_gap,
            "cov_gap": self.cov_gap,
            "coverage": self.coverage,
            "rows": self.rows,
        }


def aggregate_rows(rows: list[dict]) -> AggregateReport:
    ok = [r for r in rows if not r.get("error")]
    n_failed = len(rows) - len(ok)
    n_calls = np.array([r["n_calls"] for r in ok], dtype=float)
    mean_calls = float(n_calls.mean()) if ok else float("nan")
    cov_calls = float(n_calls.std(ddof=1) / mean_calls) if len(ok) > 1 and mean_calls else float("nan")
    gaps = [
        r["eps_max_hat"] - r["eps_true"]
        for r in ok
        if r.get("eps_max_hat") is not None and r.get("eps_true") is not None
    ]
    covered = [
        r["eps_true"] <= r["eps_max_hat"]
        for r in ok
        if r.get("eps_max_hat") is not None and r.get("eps_true") is not None
    ]
    mean_gap = cov_gap = coverage = None
    if gaps:
        g = np.array(gaps, dtype=float)
        mean_gap = float(g.mean())
        cov_gap = float(g.std(ddof=1) / mean_gap) if len(gaps) > 1 and mean_gap else None
        coverage = float(np.mean(covered))
    return AggregateReport(
        rows=rows,
        n_runs=len(rows),
        n_failed=n_failed,
        mean_n_calls=mean_calls,
        cov_n_calls=cov_calls,
        mean_gap=mean_gap,
        cov_gap=cov_gap,
        coverage=coverage,
    )


def write_rows_csv(path, rows: list[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROW_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(r.get(c)) if c not in ("method", "flags") else str(r.get(c, "")) for c in ROW_COLUMNS])


def read_rows_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            row: dict = {}
            for key, raw in rec.items():
                if key in ("method", "flags"):
                    row[key] = raw
                elif raw == "":
                    row[key] = None
                elif key in ("seed", "n_calls", "n_calls_initial", "n_calls_adaptive", "n_pool"):
                    row[key] = int(raw)
                elif key == "converged":
                    row[key] = raw == "True"
                else:
                    row[key] = float(raw)
            rows.append(row)
    return rows
