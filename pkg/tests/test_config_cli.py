import json

import numpy as np
import pytest

from relikit.cli import main
from relikit.config import ConfigError, PRESETS, parse_config, validate_config
from relikit.harness import compare_methods, run_single, run_sweep, sweep_seeds
from relikit.reporting import (
    aggregate_rows,
    load_report_json,
    read_rows_csv,
    report_from_dict,
    report_to_dict,
)


def _write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


SMALL_RUN = {
    "benchmark": "series4",
    "method": "REAK",
    "eps_thr": 0.05,
    "seed": 1,
    "n_pool_initial": 1500,
    "n_pool_increment": 1500,
    "cov_thr": 0.3,
    "max_calls": 200,
}


class TestValidateConfig:
    def test_minimal_config_applies_defaults(self):
        cfg = validate_config({"benchmark": "series4", "method": "REAK", "eps_thr": 0.05, "seed": 1})
        assert cfg.engine.gamma == 20.0  # series4 benchmark default
        assert cfg.engine.delta_alpha == 0.01
        assert cfg.engine.eff_stop == 1e-3
        assert cfg.engine.cov_thr == 0.015  # from the benchmark preset
        assert cfg.engine.max_calls == 910

    def test_minimal_other_benchmark_defaults(self):
        cfg = validate_config({"benchmark": "oscillator6", "method": "AKMCS", "seed": 0})
        assert cfg.engine.gamma == 5.0
        assert cfg.engine.cov_thr == 0.022

    def test_out_of_range_eps_thr(self):
        with pytest.raises(ConfigError, match=r"eps_thr.*\(0, 1\).*1\.5"):
            validate_config({"benchmark": "series4", "method": "REAK", "eps_thr": 1.5})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="epsilon_threshold"):
            validate_config({"benchmark": "series4", "method": "REAK", "epsilon_threshold": 0.05})

    def test_method_required(self):
        with pytest.raises(ConfigError, match="method"):
            validate_config({"benchmark": "series4"})

    def test_benchmark_xor_evaluator(self):
        with pytest.raises(ConfigError, match="exactly one"):
            validate_config({"method": "MCS"})

    def test_preset_table2_expansion(self):
        cfg = validate_config({"preset": "table2", "method": "REAK", "eps_thr": 0.05, "seed": 3})
        assert cfg.benchmark == "series4"
        assert cfg.engine.n_pool_initial == 100_000
        assert cfg.engine.n_pool_increment == 100_000
        assert cfg.engine.cov_thr == 0.015
        assert cfg.engine.gamma == 20.0

    def test_all_presets_valid(self):
        for name in PRESETS:
            cfg = validate_config({"preset": name, "method": "REAK", "seed": 0})
            assert cfg.benchmark is not None

    def test_explicit_key_overrides_preset(self):
        cfg = validate_config({"preset": "table2", "method": "REAK", "cov_thr": 0.05, "seed": 0})
        assert cfg.engine.cov_thr == 0.05

    def test_evaluator_config(self):
        cfg = validate_config(
            {
                "evaluator": {"command": "python model.py"},
                "variables": [
                    {"name": "x1", "kind": "normal", "param1": 0, "param2": 1},
                    {"name": "x2", "kind": "uniform", "param1": 0, "param2": 2},
                ],
                "method": "AKMCS",
                "seed": 5,
            }
        )
        assert cfg.evaluator_command == ["python", "model.py"]

    def test_evaluator_requires_variables(self):
        with pytest.raises(ConfigError, match="variables"):
            validate_config({"evaluator": {"command": ["x"]}, "method": "MCS"})

    def test_bad_variable_spec_named(self):
        with pytest.raises(ConfigError, match="variables"):
            validate_config(
                {
                    "evaluator": {"command": ["x"]},
                    "variables": [{"kind": "normal", "param1": 0}],
                    "method": "MCS",
                }
            )

    def test_duplicate_seeds_rejected(self):
        with pytest.raises(ConfigError, match="distinct"):
            validate_config({**SMALL_RUN, "seeds": [5, 5]})

    def test_parse_config_file_errors(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        with pytest.raises(ConfigError, match="JSON"):
            parse_config(bad)


class TestReportSerialization:
    @pytest.fixture(scope="class")
    def report(self):
        cfg = validate_config(SMALL_RUN)
        g, rv, _ = cfg.make_problem()
        from relikit.engines import run_engine

        rep = run_engine(g, rv, cfg.engine)
        rep.eps_true = 0.0123
        return rep

    def test_round_trip_bit_exact(self, report):
        data = json.loads(json.dumps(report_to_dict(report)))
        back = report_from_dict(data)
        assert back.pf_hat == report.pf_hat
        assert back.cov_pf == report.cov_pf
        assert back.eps_max_hat == report.eps_max_hat
        assert back.wall_time == report.wall_time
        for a, b in zip(back.trace, report.trace):
            assert a == b

    def test_n_calls_label(self, report):
        assert report.n_calls_label == f"{report.n_calls_initial} + {report.n_calls_adaptive}"


class TestRunSingle:
    def test_writes_report_trace_and_pool(self, tmp_path):
        cfg = validate_config({**SMALL_RUN, "label": "demo"})
        report, paths = run_single(cfg, outdir=tmp_path)
        assert paths["report"].exists() and paths["trace"].exists() and paths["pool"].exists()
        loaded = load_report_json(paths["report"])
        assert loaded.pf_hat == report.pf_hat
        with open(paths["report"]) as fh:
            blob = json.load(fh)
        assert blob["config"]["eps_thr"] == 0.05  # effective config echo
        header = paths["trace"].read_text().splitlines()[0]
        assert header == "iteration,n_calls,n_pool,pf_hat,max_eff,alpha,n_omega2,eps_max"
        pool_header = paths["pool"].read_text().splitlines()[0]
        assert pool_header == "x1,x2,density,pred_mean,in_esr,evaluated"

    def test_pool_csv_only_for_2d(self, tmp_path):
        cfg = validate_config(
            {
                "benchmark": "oscillator6",
                "method": "AKMCS",
                "seed": 2,
                "n_pool_initial": 1000,
                "n_pool_increment": 1000,
                "cov_thr": 0.5,
                "max_calls": 60,
            }
        )
        _, paths = run_single(cfg, outdir=tmp_path)
        assert "pool" not in paths


class TestRunSweep:
    def test_sweep_rows_and_exact_recompute(self, tmp_path):
        cfg = validate_config({**SMALL_RUN, "label": "sw"})
        agg = run_sweep(cfg, reps=3, jobs=1, outdir=tmp_path)
        assert agg.n_runs == 3 and agg.n_failed == 0
        rows = read_rows_csv(tmp_path / "sw_seeds.csv")
        re_agg = aggregate_rows(rows)
        assert re_agg.mean_n_calls == agg.mean_n_calls
        assert re_agg.cov_n_calls == agg.cov_n_calls
        assert re_agg.mean_gap == agg.mean_gap
        assert re_agg.coverage == agg.coverage

    def test_sweep_needs_two_reps(self):
        cfg = validate_config(SMALL_RUN)
        with pytest.raises(ConfigError, match="repetitions"):
            run_sweep(cfg, reps=1)

    def test_explicit_seed_list(self):
        cfg = validate_config({**SMALL_RUN, "seeds": [4, 9]})
        assert sweep_seeds(cfg) == [4, 9]

    def test_parallel_matches_serial(self, tmp_path):
        cfg = validate_config(SMALL_RUN)
        a = run_sweep(cfg, reps=2, jobs=1)
        b = run_sweep(cfg, reps=2, jobs=2)
        assert [r["pf_hat"] for r in a.rows] == [r["pf_hat"] for r in b.rows]
        assert [r["n_calls"] for r in a.rows] == [r["n_calls"] for r in b.rows]


class TestCompare:
    def test_compare_shared_pool(self):
        cfg = validate_config(SMALL_RUN)
        table = compare_methods(cfg)
        methods = [r["method"] for r in table["rows"]]
        assert methods == ["MCS", "AKMCS", "ISKRA", "REAK"]
        mcs_row = table["rows"][0]
        for row in table["rows"][1:]:
            assert row["eps_true"] == abs(row["pf_hat"] / mcs_row["pf_hat"] - 1.0)
        reak = table["rows"][3]
        assert reak["eps_max_hat"] <= 0.05


class TestCli:
    def test_run_exit_codes_and_outputs(self, tmp_path):
        cfg_path = _write(tmp_path, {**SMALL_RUN, "label": "cli"})
        rc = main(["run", "--config", str(cfg_path), "--output", str(tmp_path / "out")])
        assert rc == 0
        assert (tmp_path / "out" / "cli_report.json").exists()

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg_path = _write(tmp_path, {"benchmark": "series4", "method": "REAK", "eps_thr": 2.0})
        rc = main(["run", "--config", str(cfg_path)])
        assert rc == 2
        assert "eps_thr" in capsys.readouterr().err

    def test_sweep_cli(self, tmp_path):
        cfg_path = _write(tmp_path, {**SMALL_RUN, "label": "sweepcli"})
        rc = main(
            ["sweep", "--config", str(cfg_path), "--reps", "2", "--jobs", "1", "--output", str(tmp_path / "o")]
        )
        assert rc == 0
        assert (tmp_path / "o" / "sweepcli_seeds.csv").exists()
        assert (tmp_path / "o" / "sweepcli_aggregate.json").exists()

    def test_list_benchmarks(self, capsys):
        assert main(["list-benchmarks"]) == 0
        out = capsys.readouterr().out
        for name in ("series4", "rastrigin2", "oscillator6", "tube9"):
            assert name in out

    def test_compare_cli(self, tmp_path):
        cfg_path = _write(tmp_path, {**SMALL_RUN, "label": "cmp"})
        rc = main(["compare", "--config", str(cfg_path), "--output", str(tmp_path / "c")])
        assert rc == 0
        table = json.loads((tmp_path / "c" / "cmp_compare.json").read_text())
        assert len(table["rows"]) == 4

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RELIKIT_OUTPUT_DIR", str(tmp_path / "envout"))
        cfg_path = _write(tmp_path, {**SMALL_RUN, "label": "env"})
        rc = main(["run", "--config", str(cfg_path)])
        assert rc == 0
        assert (tmp_path / "envout" / "env_report.json").exists()
