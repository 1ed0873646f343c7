"""Command-line interface.

Subcommands: ``run`` (single engine run), ``sweep`` (multi-seed aggregate),
``compare`` (methods on a shared pool) and ``list-benchmarks``. Exit codes:
0 success, 2 config error, 3 engine non-convergence or comparison refusal,
4 evaluator failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .benchmarks import BENCHMARKS
from .config import ConfigError, parse_config
from .evaluators import EvaluatorError
from .harness import ComparisonError, compare_methods, default_output_dir, run_single, run_sweep
from .kernels import backend_name

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3
EXIT_EVALUATOR = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relikit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one engine and write report + traces")
    p_run.add_argument("--config", required=True, help="path to the JSON run config")
    p_run.add_argument("--output", default=None, help="output directory (default: config/env)")

    p_sweep = sub.add_parser("sweep", help="aggregate over repeated seeded runs")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--reps", type=int, default=None, help="number of repetitions")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_sweep.add_argument("--output", default=None)

    p_cmp = sub.add_parser("compare", help="run AKMCS/ISKRA/REAK on one shared pool")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--output", default=None)

    sub.add_parser("list-benchmarks", help="show the built-in benchmark problems")
    return parser


def _fmt_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    outdir = Path(args.output) if args.output else default_output_dir(cfg)
    report, paths = run_single(cfg, outdir)
    print(
        f"{cfg.method} on {cfg.benchmark or 'external evaluator'}: "
        f"pf_hat={report.pf_hat:.6g} cov={report.cov_pf:.4g} "
        f"n_calls={report.n_calls_label} eps_max={_fmt_cell(report.eps_max_hat)} "
        f"eps={_fmt_cell(report.eps_true)} flags={report.flags or '-'}"
    )
    print(f"report: {paths['report']}")
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def _cmd_sweep(args) -> int:
    cfg = parse_config(args.config)
    outdir = Path(args.output) if args.output else default_output_dir(cfg)
    agg = run_sweep(cfg, reps=args.reps, jobs=max(1, args.jobs), outdir=outdir)
    print(
        f"{cfg.method} sweep ({agg.n_runs} seeds, {agg.n_failed} failed): "
        f"mean n_calls={agg.mean_n_calls:.2f} cov={_fmt_cell(agg.cov_n_calls)} "
        f"mean(eps_max-eps)={_fmt_cell(agg.mean_gap)} coverage={_fmt_cell(agg.coverage)}"
    )
    print(f"rows: {outdir / (cfg.label + '_seeds.csv')}")
    return EXIT_OK if agg.n_failed == 0 else EXIT_NONCONVERGED


def _cmd_compare(args) -> int:
    cfg = parse_config(args.config)
    table = compare_methods(cfg)
    outdir = Path(args.output) if args.output else default_output_dir(cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / f"{cfg.label}_compare.json", "w") as fh:
        json.dump(table, fh, indent=2)
        fh.write("\n")
    header = f"{'method':8s} {'n_calls':>12s} {'pf_hat':>12s} {'cov':>8s} {'eps_max':>9s} {'eps':>9s}"
    print(f"benchmark={table['benchmark']} seed={table['seed']} eps_thr={table['eps_thr']} pool={table['n_pool']}")
    print(header)
    for row in table["rows"]:
        print(
            f"{row['method']:8s} {row['n_calls_label']:>12s} {row['pf_hat']:>12.6g} "
            f"{_fmt_cell(row['cov_pf']):>8s} {_fmt_cell(row['eps_max_hat']):>9s} {_fmt_cell(row['eps_true']):>9s}"
        )
    bad = [r for r in table["rows"] if not r["converged"]]
    return EXIT_NONCONVERGED if bad else EXIT_OK


def _cmd_list() -> int:
    print(f"kernel backend: {backend_name()}")
    print(f"{'name':12s} {'dim':>3s} {'reference pf':>14s} {'(cov)':>7s} {'at N':>9s}  description")
    for b in BENCHMARKS.values():
        print(
            f"{b.name:12s} {b.n_r:3d} {b.reference_pf:14.4g} {b.reference_cov:7.3f} "
            f"{b.reference_n:9d}  {b.description}"
        )
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "compare":
            return _cmd_compare(args)
        return _cmd_list()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvaluatorError as exc:
        print(f"evaluator error: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR
    except ComparisonError as exc:
        print(f"comparison error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
