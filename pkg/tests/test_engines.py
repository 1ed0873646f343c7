import dataclasses

import numpy as np
import pytest
from scipy import special

from relikit.benchmarks import get_benchmark
from relikit.engines import (
    EngineConfig,
    cov_of_pf,
    crude_mcs,
    run_ak_mcs,
    run_engine,
    true_error_vs_oracle,
)
from relikit.distributions import Marginal, RandomVector
from relikit.evaluators import EvaluatorError, LimitState


def _reports_equal(a, b) -> bool:
    """Full-report equality ignoring wall-clock time."""
    fa, fb = dataclasses.asdict(a), dataclasses.asdict(b)
    for f in (fa, fb):
        f.pop("wall_time")
        f.pop("pool")
        f.pop("omega2_idx")
        for row in f["trace"]:
            pass
    return fa == fb


STD_NORMAL_1D = RandomVector([Marginal("normal", 0.0, 1.0)])


class TestCrudeMcs:
    def test_constant_failure(self):
        g = LimitState(lambda x: np.full(x.shape[0], -1.0), 1)
        rep = crude_mcs(g, STD_NORMAL_1D, 500, seed=1)
        assert rep.pf_hat == 1.0
        assert rep.cov_pf == 0.0
        assert rep.n_calls == 500

    def test_half_space(self):
        g = LimitState(lambda x: x[:, 0], 1)
        rep = crude_mcs(g, STD_NORMAL_1D, 10**6, seed=2)
        assert abs(rep.pf_hat - 0.5) < 0.0015  # 3 binomial sigma

    def test_nonfinite_reports_index(self):
        def bad(x):
            out = x[:, 0].copy()
            out[3] = np.nan
            return out

        g = LimitState(bad, 1)
        with pytest.raises(EvaluatorError, match="index 3"):
            crude_mcs(g, STD_NORMAL_1D, 10, seed=3)

    def test_deterministic(self):
        g = LimitState(lambda x: x[:, 0] - 1.0, 1)
        a = crude_mcs(g, STD_NORMAL_1D, 2000, seed=7)
        b = crude_mcs(g, STD_NORMAL_1D, 2000, seed=7)
        assert _reports_equal(a, b)


class TestCovOfPf:
    def test_reference_value_small_pf(self):
        assert cov_of_pf(4.498e-3, 10**6) == pytest.approx(0.014876862289124897, rel=1e-12)

    def test_reference_value_oscillator(self):
        assert cov_of_pf(2.847e-2, 7 * 10**4) == pytest.approx(0.0221, abs=2e-4)

    def test_certain_failure(self):
        assert cov_of_pf(1.0, 123) == 0.0

    def test_zero_pf_sentinel(self):
        assert cov_of_pf(0.0, 100) == float("inf")

    def test_invalid(self):
        with pytest.raises(ValueError):
            cov_of_pf(1.5, 10)


class TestTrueError:
    def test_exact_match(self):
        assert true_error_vs_oracle(0.1, 0.1) == 0.0

    def test_reference_pair(self):
        assert true_error_vs_oracle(4.401e-3, 4.498e-3) == pytest.approx(0.0216, abs=1e-4)

    def test_double(self):
        assert true_error_vs_oracle(0.2, 0.1) == 1.0

    def test_zero_oracle(self):
        with pytest.raises(ValueError):
            true_error_vs_oracle(0.1, 0.0)


def _linear_tail_problem():
    # pf = P(N(0,1) >= 2) with a linear margin; closed-form truth
    g = LimitState(lambda x: 2.0 - x[:, 0], 1)
    return g, STD_NORMAL_1D, float(special.ndtr(-2.0))


class TestAkMcs:
    def test_linear_1d_converges_to_normal_tail(self):
        g, rv, pf_true = _linear_tail_problem()
        cfg = EngineConfig(
            method="AKMCS",
            cov_thr=0.15,
            n_pool_initial=4000,
            n_pool_increment=4000,
            seed=5,
            max_calls=200,
        )
        rep = run_ak_mcs(g, rv, cfg)
        assert rep.converged
        se = np.sqrt(pf_true * (1 - pf_true) / rep.n_pool)
        assert abs(rep.pf_hat - pf_true) < 3 * se
        # a linear margin needs few refinements on top of the initial set
        assert rep.n_calls_adaptive <= 25

    def test_method_guard(self):
        g, rv, _ = _linear_tail_problem()
        with pytest.raises(ValueError, match="AKMCS"):
            run_ak_mcs(g, rv, EngineConfig(method="REAK", n_pool_initial=100, max_calls=50))

    def test_pf_equals_predicted_sign_fraction(self):
        bench = get_benchmark("series4")
        cfg = EngineConfig(
            method="AKMCS", cov_thr=0.3, n_pool_initial=2000, n_pool_increment=2000, seed=3, max_calls=200
        )
        rep = run_engine(bench.g, bench.rv, cfg)
        pool = rep.pool
        assert rep.pf_hat == np.count_nonzero(pool.pred_mean <= 0.0) / pool.n
        assert rep.cov_pf == cov_of_pf(rep.pf_hat, pool.n)

    def test_no_point_evaluated_twice_and_calls_counted_once(self):
        bench = get_benchmark("series4")
        cfg = EngineConfig(
            method="AKMCS", cov_thr=0.3, n_pool_initial=2000, n_pool_increment=2000, seed=4, max_calls=200
        )
        rep = run_engine(bench.g, bench.rv, cfg)
        assert rep.n_calls == int(rep.pool.evaluated.sum())
        assert rep.n_calls == rep.n_calls_initial + rep.n_calls_adaptive

    def test_max_calls_flags_partial_report(self):
        bench = get_benchmark("rastrigin2")
        cfg = EngineConfig(
            method="AKMCS", cov_thr=0.05, n_pool_initial=4000, n_pool_increment=4000, seed=1, max_calls=20
        )
        rep = run_engine(bench.g, bench.rv, cfg)
        assert not rep.converged
        assert "max_calls_exceeded" in rep.flags
        assert rep.n_calls <= 20


class TestEngineConfig:
    def test_validation_messages(self):
        with pytest.raises(ValueError, match="eps_thr"):
            EngineConfig(method="REAK", eps_thr=1.5)
        with pytest.raises(ValueError, match="method"):
            EngineConfig(method="FORM")
        with pytest.raises(ValueError, match="n_initial_train"):
            EngineConfig(method="REAK", n_initial_train=1)

    def test_alpha_ci_matches_confidence(self):
        cfg = EngineConfig(method="REAK")
        assert cfg.alpha_ci == pytest.approx(1.959963984540054, rel=1e-12)


class TestIskra:
    def test_degenerate_region_matches_akmcs_trajectory(self):
        # alpha*pf*N rounds to zero, so the mask never excludes anything and
        # the run must follow AK-MCS step for step
        bench = get_benchmark("series4")
        kwargs = dict(
            cov_thr=0.30, n_pool_initial=1500, n_pool_increment=1500, seed=9, max_calls=300, eps_thr=1e-4
        )
        rep_i = run_engine(bench.g, bench.rv, EngineConfig(method="ISKRA", **kwargs))
        rep_a = run_engine(bench.g, bench.rv, EngineConfig(method="AKMCS", **kwargs))
        assert rep_i.pf_hat == rep_a.pf_hat
        assert rep_i.n_calls == rep_a.n_calls
        assert [r.max_eff for r in rep_i.trace] == [r.max_eff for r in rep_a.trace]
        assert rep_i.eps_max_hat == 1e-4  # declared region coefficient
        assert rep_a.eps_max_hat is None

    def test_reports_declared_alpha(self):
        bench = get_benchmark("series4")
        cfg = EngineConfig(
            method="ISKRA", eps_thr=0.05, cov_thr=0.3, n_pool_initial=2000, n_pool_increment=2000, seed=2, max_calls=300
        )
        rep = run_engine(bench.g, bench.rv, cfg)
        assert rep.eps_max_hat == 0.05


class TestReak:
    def _cfg(self, **over):
        base = dict(
            method="REAK",
            eps_thr=0.05,
            cov_thr=0.15,
            n_pool_initial=3000,
            n_pool_increment=3000,
            gamma=5.0,
            seed=12,
            max_calls=400,
        )
        base.update(over)
        return EngineConfig(**base)

    def test_initial_alpha_rule(self):
        # gamma * eps_thr * n_r^2 = 5 * 0.05 * 4 = 1.0 for two dimensions
        bench = get_benchmark("series4")
        rep = run_engine(bench.g, bench.rv, self._cfg())
        alphas = [r.alpha for r in rep.trace if r.alpha is not None]
        assert alphas[0] == pytest.approx(1.0, rel=1e-12)

    def test_alpha_decreases_by_delta_between_expansions(self):
        bench = get_benchmark("series4")
        rep = run_engine(bench.g, bench.rv, self._cfg())
        alphas = []
        for r in rep.trace:
            if r.alpha is not None and (not alphas or r.alpha != alphas[-1]):
                alphas.append(r.alpha)
        diffs = np.diff(alphas)
        assert np.all(diffs < 0)
        assert np.allclose(diffs, -0.01, atol=1e-12)

    def test_non_flagged_run_meets_threshold(self):
        bench = get_benchmark("series4")
        rep = run_engine(bench.g, bench.rv, self._cfg())
        assert rep.converged and not rep.flags
        assert rep.eps_max_hat <= 0.05
        final_rows = [r for r in rep.trace if r.eps_max is not None]
        assert final_rows[-1].eps_max == rep.eps_max_hat
        assert final_rows[-1].max_eff <= 1e-3

    def test_trace_monotone_in_iteration(self):
        bench = get_benchmark("series4")
        rep = run_engine(bench.g, bench.rv, self._cfg())
        its = [r.iteration for r in rep.trace]
        assert its == sorted(its)
        calls = [r.n_calls for r in rep.trace]
        assert all(b >= a for a, b in zip(calls, calls[1:]))

    def test_deterministic_bitwise(self):
        bench = get_benchmark("series4")
        a = run_engine(bench.g, bench.rv, self._cfg())
        b = run_engine(bench.g, bench.rv, self._cfg())
        assert _reports_equal(a, b)

    def test_zero_failure_sentinel_forces_refinement(self):
        # a margin so large the initial model sees no failures anywhere:
        # refinement must continue rather than stopping at the sentinel
        g = LimitState(lambda x: 6.0 - x[:, 0], 1)
        cfg = EngineConfig(
            method="REAK",
            eps_thr=0.05,
            cov_thr=5.0,
            n_pool_initial=2000,
            n_pool_increment=2000,
            seed=3,
            max_calls=60,
        )
        rep = run_engine(g, STD_NORMAL_1D, cfg)
        # the pool holds no failure at all (P ~ 1e-9), so the run cannot
        # converge, but it must have spent real refinement effort
        assert rep.n_calls > cfg.n_initial_train


class TestSharedSubstreams:
    def test_identical_pool_and_initial_points_across_methods(self):
        bench = get_benchmark("series4")
        reports = {}
        for method in ("AKMCS", "ISKRA", "REAK"):
            cfg = EngineConfig(
                method=method, eps_thr=0.05, cov_thr=0.3, n_pool_initial=2000, n_pool_increment=2000,
                seed=21, max_calls=300,
            )
            reports[method] = run_engine(bench.g, bench.rv, cfg)
        first = reports["AKMCS"]
        for rep in reports.values():
            assert rep.model_info["initial_indices"] == first.model_info["initial_indices"]
            assert np.array_equal(rep.pool.samples[:2000], first.pool.samples[:2000])


class TestSubprocessEvaluator:
    SCRIPT = (
        "import sys, math\n"
        "for line in sys.stdin:\n"
        "    x1, x2 = map(float, line.split())\n"
        "    s2 = math.sqrt(2.0)\n"
        "    b = min(3 + 0.1*(x1-x2)**2 - (x1+x2)/s2,\n"
        "            3 + 0.1*(x1-x2)**2 + (x1+x2)/s2,\n"
        "            (x1-x2) + 6/s2, -(x1-x2) + 6/s2)\n"
        "    print(repr(b))\n"
        "    sys.stdout.flush()\n"
    )

    def test_matches_in_process_engine(self, tmp_path):
        import sys

        from relikit.evaluators import SubprocessEvaluator

        script = tmp_path / "model.py"
        script.write_text(self.SCRIPT)
        bench = get_benchmark("series4")
        cfg = EngineConfig(
            method="AKMCS", cov_thr=0.5, n_pool_initial=800, n_pool_increment=800, seed=6, max_calls=100
        )
        with SubprocessEvaluator([sys.executable, str(script)], 2) as g_ext:
            rep_ext = run_engine(g_ext, bench.rv, cfg)
        rep_in = run_engine(bench.g, bench.rv, cfg)
        assert rep_ext.pf_hat == rep_in.pf_hat
        assert rep_ext.n_calls == rep_in.n_calls

    def test_protocol_failure_raises(self):
        import sys

        from relikit.evaluators import SubprocessEvaluator

        g = SubprocessEvaluator([sys.executable, "-c", "print('not-a-number')"], 1)
        with pytest.raises(EvaluatorError):
            g.batch(np.zeros((1, 1)))
        g.close()
