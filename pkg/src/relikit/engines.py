"""Failure-probability estimation engines.

Four methods over a shared candidate-pool machinery, all deterministic
under a seed:

* ``MCS``    - crude Monte Carlo on an i.i.d. sample.
* ``AKMCS``  - adaptive Kriging: evaluate the global feasibility argmax
  until the learning threshold, grow the pool until the coefficient of
  variation passes.
* ``ISKRA``  - same loop with selection masked to a fixed-mass
  high-density sampling region (region coefficient = the error threshold).
* ``REAK``   - masked learning plus an explicit maximum-error-rate bound;
  the sampling-region coefficient starts at gamma * eps_thr * n_r^2 and
  shrinks by delta_alpha until the bound meets the threshold.

Every true-model evaluation is counted exactly once; no pool point is
evaluated twice.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ._streams import SK_ERROR_MC, SK_FIT, SK_GROWTH, SK_INIT_TRAIN, SK_POOL, substream
from .distributions import RandomVector, SampleMatrix, lhs_sample, plain_sample
from .error_bound import WrongSignCounts, build_partition, density_order, max_error_rate
from .evaluators import EvaluatorError, evaluate_batch
from .kriging import mle_fit
from .learning import masked_argmax
from . import kernels

METHODS = ("MCS", "AKMCS", "ISKRA", "REAK")


@dataclass
class DesignPool:
    """Candidate samples with densities, predictions and evaluation state."""

    samples: np.ndarray
    density: np.ndarray
    pred_mean: np.ndarray
    pred_sd: np.ndarray
    evaluated: np.ndarray
    g_values: np.ndarray
    density_rank: np.ndarray
    eff: np.ndarray
    p_wrong: np.ndarray

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def pred_fail(self) -> np.ndarray:
        return self.pred_mean <= 0.0


def _new_pool(rv: RandomVector, sample: SampleMatrix) -> DesignPool:
    x = sample.values
    density = rv.joint_pdf(x)
    n = x.shape[0]
    return DesignPool(
        samples=x,
        density=density,
        pred_mean=np.zeros(n),
        pred_sd=np.zeros(n),
        evaluated=np.zeros(n, dtype=bool),
        g_values=np.full(n, np.nan),
        density_rank=density_order(density),
        eff=np.zeros(n),
        p_wrong=np.zeros(n),
    )


@dataclass
class EngineConfig:
    """Engine parameters; defaults follow the bundled benchmark practice."""

    method: str
    eps_thr: float = 0.05
    cov_thr: float = 0.05
    n_pool_initial: int = 10_000
    n_pool_increment: int = 10_000
    n_initial_train: int = 12
    eff_stop: float = 1e-3
    gamma: float = 5.0
    delta_alpha: float = 0.01
    confidence_q: float = 0.05
    seed: int = 0
    max_calls: int = 2000
    max_pool_size: int = 2_000_000
    fit_starts: int = 5
    fit_budget_per_dim: int = 200
    refit_starts: int = 0
    refit_budget_per_dim: int = 50
    full_refit_every: int = 20

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0.0 < self.eps_thr < 1.0:
            raise ValueError(f"eps_thr must lie in (0, 1), got {self.eps_thr}")
        if self.cov_thr <= 0.0:
            raise ValueError(f"cov_thr must be positive, got {self.cov_thr}")
        if self.n_initial_train < 2:
            raise ValueError(f"n_initial_train must be >= 2, got {self.n_initial_train}")
        if self.n_initial_train > self.n_pool_initial:
            raise ValueError("n_initial_train cannot exceed n_pool_initial")
        if self.delta_alpha <= 0.0:
            raise ValueError(f"delta_alpha must be positive, got {self.delta_alpha}")
        if not 0.0 < self.confidence_q < 1.0:
            raise ValueError(f"confidence_q must lie in (0, 1), got {self.confidence_q}")
        if self.n_pool_initial < 1 or self.n_pool_increment < 1:
            raise ValueError("pool sizes must be positive")
        if self.max_calls <= self.n_initial_train:
            raise ValueError("max_calls must exceed n_initial_train")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")

    @property
    def alpha_ci(self) -> float:
        """Normal critical value matching confidence_q (1.96 for 0.05)."""
        return float(-special.ndtri(self.confidence_q / 2.0))


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    n_calls: int
    n_pool: int
    pf_hat: float
    max_eff: float
    alpha: float | None
    n_omega2: int
    eps_max: float | None


@dataclass
class RunReport:
    """Outcome of one engine run; ``pool`` stays in memory only."""

    method: str
    seed: int
    pf_hat: float
    cov_pf: float
    n_calls: int
    n_calls_initial: int
    n_calls_adaptive: int
    eps_max_hat: float | None
    n_pool: int
    converged: bool
    flags: list[str]
    trace: list[TraceRow]
    wall_time: float
    model_info: dict | None = None
    eps_true: float | None = None
    pool: DesignPool | None = field(default=None, repr=False, compare=False)
    omega2_idx: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n_calls_label(self) -> str:
        return f"{self.n_calls_initial} + {self.n_calls_adaptive}"


def cov_of_pf(pf: float, n: int) -> float:
    """Monte-Carlo coefficient of variation sqrt((1 - pf) / (pf n)).

    ``pf = 0`` returns the +inf sentinel so callers reject pool growth and
    flag the run instead of looping.
    """
    if pf < 0.0 or pf > 1.0:
        raise ValueError(f"pf must lie in [0, 1], got {pf}")
    if pf == 0.0:
        return float("inf")
    return float(np.sqrt((1.0 - pf) / (pf * n)))


def true_error_vs_oracle(pf_hat: float, pf_mcs: float) -> float:
    """Relative error |pf_hat / pf_mcs - 1| against a same-pool oracle."""
    if pf_mcs <= 0.0:
        raise ValueError("oracle failure probability must be positive")
    return float(abs(pf_hat / pf_mcs - 1.0))


def _evaluate_points(g, pool: DesignPool, idx: np.ndarray):
    if np.any(pool.evaluated[idx]):
        raise RuntimeError("internal error: point evaluated twice")
    values = evaluate_batch(g, pool.samples[idx])
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise EvaluatorError(f"non-finite limit-state value at pool index {int(idx[bad[0]])}")
    pool.g_values[idx] = values
    pool.evaluated[idx] = True


def crude_mcs(g, rv: RandomVector, n: int, seed: int) -> RunReport:
    """Crude Monte Carlo estimate from n i.i.d. draws."""
    if n < 1:
        raise ValueError("crude_mcs needs n >= 1")
    t0 = time.perf_counter()
    pool = _new_pool(rv, plain_sample(rv, n, (seed, SK_POOL)))
    _evaluate_points(g, pool, np.arange(n))
    pool.pred_mean = pool.g_values.copy()
    pf = float(np.count_nonzero(pool.g_values <= 0.0)) / n
    cov = cov_of_pf(pf, n)
    trace = [TraceRow(1, n, n, pf, 0.0, None, 0, None)]
    return RunReport(
        method="MCS",
        seed=seed,
        pf_hat=pf,
        cov_pf=cov,
        n_calls=n,
        n_calls_initial=n,
        n_calls_adaptive=0,
        eps_max_hat=None,
        n_pool=n,
        converged=True,
        flags=[],
        trace=trace,
        wall_time=time.perf_counter() - t0,
        pool=pool,
        omega2_idx=np.empty(0, dtype=np.int64),
    )


def _fit_model(pool: DesignPool, cfg: EngineConfig, fit_index: int, theta_prev):
    idx = np.flatnonzero(pool.evaluated)
    x = pool.samples[idx]
    y = pool.g_values[idx]
    d = x.shape[1]
    full = theta_prev is None or (cfg.full_refit_every > 0 and fit_index % cfg.full_refit_every == 0)
    starts = cfg.fit_starts if full else cfg.refit_starts
    budget = (cfg.fit_budget_per_dim if full else cfg.refit_budget_per_dim) * d
    return mle_fit(
        x,
        y,
        n_starts=starts,
        budget=budget,
        seed=(cfg.seed, SK_FIT, fit_index),
        theta0=theta_prev,
    )


def _refresh_scores(pool: DesignPool, lo: int = 0):
    mean = np.ascontiguousarray(pool.pred_mean[lo:])
    sd = np.ascontiguousarray(pool.pred_sd[lo:])
    pool.eff[lo:] = kernels.eff_values(mean, sd)
    pool.p_wrong[lo:] = kernels.wrong_sign_probs(mean, sd)


def _grow_pool(pool: DesignPool, rv: RandomVector, model, cfg: EngineConfig, growth_count: int) -> DesignPool:
    new = plain_sample(rv, cfg.n_pool_increment, (cfg.seed, SK_GROWTH, growth_count))
    old_n = pool.n
    x = np.vstack([pool.samples, new.values])
    density = np.concatenate([pool.density, rv.joint_pdf(new.values)])
    pb = model.predict_batch(new.values)
    grown = DesignPool(
        samples=x,
        density=density,
        pred_mean=np.concatenate([pool.pred_mean, pb.mean]),
        pred_sd=np.concatenate([pool.pred_sd, pb.sd]),
        evaluated=np.concatenate([pool.evaluated, np.zeros(new.rows, dtype=bool)]),
        g_values=np.concatenate([pool.g_values, np.full(new.rows, np.nan)]),
        density_rank=density_order(density),
        eff=np.concatenate([pool.eff, np.zeros(new.rows)]),
        p_wrong=np.concatenate([pool.p_wrong, np.zeros(new.rows)]),
    )
    _refresh_scores(grown, lo=old_n)
    return grown


def _run_adaptive(g, rv: RandomVector, cfg: EngineConfig) -> RunReport:
    t0 = time.perf_counter()
    flags: list[str] = []
    d = rv.n_r

    pool = _new_pool(rv, lhs_sample(rv, cfg.n_pool_initial, (cfg.seed, SK_POOL)))
    init_idx = np.sort(
        substream(cfg.seed, SK_INIT_TRAIN).choice(pool.n, size=cfg.n_initial_train, replace=False)
    )
    _evaluate_points(g, pool, init_idx)
    n_calls = int(init_idx.size)

    if cfg.method == "REAK":
        alpha = cfg.gamma * cfg.eps_thr * d * d
    elif cfg.method == "ISKRA":
        alpha = cfg.eps_thr
    else:
        alpha = None
    esr_active = cfg.method in ("ISKRA", "REAK")
    esr_exhausted = False

    model = None
    theta_prev = None
    fit_index = 0
    growth_count = 0
    checkpoint = 0
    iteration = 0
    need_fit = True
    converged = True
    eps_final = None
    partition = None
    trace: list[TraceRow] = []

    while True:
        if need_fit:
            model = _fit_model(pool, cfg, fit_index, theta_prev)
            theta_prev = model.theta
            fit_index += 1
            pb = model.predict_batch(pool.samples)
            pool.pred_mean = pb.mean
            pool.pred_sd = pb.sd
            _refresh_scores(pool)
            need_fit = False
        pf_hat = float(np.count_nonzero(pool.pred_fail)) / pool.n

        partition = None
        if esr_active and not esr_exhausted:
            partition = build_partition(pool.density, alpha, pf_hat, order=pool.density_rank)
            if partition.degenerate and "degenerate_partition" not in flags:
                flags.append("degenerate_partition")
            sel_mask = partition.mask(pool.n)
        else:
            sel_mask = np.ones(pool.n, dtype=bool)
        sel_mask &= ~pool.evaluated
        n_omega2 = partition.n_omega2 if partition is not None else 0

        iteration += 1
        if np.any(sel_mask):
            best_idx, max_eff = masked_argmax(pool.eff, sel_mask)
        else:
            best_idx, max_eff = None, 0.0

        if max_eff > cfg.eff_stop:
            trace.append(TraceRow(iteration, n_calls, pool.n, pf_hat, max_eff, alpha, n_omega2, None))
            if n_calls >= cfg.max_calls:
                flags.append("max_calls_exceeded")
                converged = False
                break
            _evaluate_points(g, pool, np.array([best_idx]))
            n_calls += 1
            need_fit = True
            continue

        # learning satisfied inside the current region
        if cfg.method == "REAK":
            if partition is not None:
                counts = WrongSignCounts.from_predictions(pool.pred_fail, pool.p_wrong, partition)
            else:
                counts = WrongSignCounts(
                    n_omega1_fail_hat=int(np.count_nonzero(pool.pred_fail)),
                    n_omega2_fail_hat=0,
                    p_wrong_safe=np.empty(0),
                    p_wrong_fail=np.empty(0),
                )
            checkpoint += 1
            bound = max_error_rate(
                counts,
                alpha_ci=cfg.alpha_ci,
                confidence_q=cfg.confidence_q,
                seed=(cfg.seed, SK_ERROR_MC, checkpoint),
            )
            trace.append(TraceRow(iteration, n_calls, pool.n, pf_hat, max_eff, alpha, n_omega2, bound.eps_max))
            if bound.eps_max > cfg.eps_thr:
                no_predicted_failures = counts.n_omega1_fail_hat + counts.n_omega2_fail_hat == 0
                if no_predicted_failures:
                    # total-uncertainty sentinel: with no predicted failures
                    # the region cannot expand (it is empty), so refinement
                    # continues past the learning threshold until a failure
                    # candidate appears or the budget runs out
                    if best_idx is not None and n_calls < cfg.max_calls:
                        _evaluate_points(g, pool, np.array([best_idx]))
                        n_calls += 1
                        need_fit = True
                        continue
                    eps_final = bound.eps_max
                    flags.append("eps_max_not_met")
                    converged = False
                    break
                if not esr_exhausted:
                    alpha -= cfg.delta_alpha
                    if alpha <= 0.0:
                        alpha = 0.0
                        esr_exhausted = True
                        flags.append("esr_exhausted")
                    continue
                eps_final = bound.eps_max
                flags.append("eps_max_not_met")
                converged = False
                break
            eps_final = bound.eps_max
        else:
            trace.append(TraceRow(iteration, n_calls, pool.n, pf_hat, max_eff, alpha, n_omega2, None))

        # pool-size check
        if pf_hat <= 0.0:
            flags.append("zero_failure_estimate")
            converged = False
            break
        if cov_of_pf(pf_hat, pool.n) <= cfg.cov_thr:
            break
        if pool.n + cfg.n_pool_increment > cfg.max_pool_size:
            flags.append("pool_budget_exceeded")
            converged = False
            break
        growth_count += 1
        pool = _grow_pool(pool, rv, model, cfg, growth_count)

    pf_hat = float(np.count_nonzero(pool.pred_fail)) / pool.n
    if cfg.method == "ISKRA":
        eps_hat = cfg.eps_thr
    elif cfg.method == "REAK":
        eps_hat = eps_final
    else:
        eps_hat = None
    info = model.info() if model is not None else None
    if info is not None:
        info["initial_indices"] = [int(i) for i in init_idx]
    return RunReport(
        method=cfg.method,
        seed=cfg.seed,
        pf_hat=pf_hat,
        cov_pf=cov_of_pf(pf_hat, pool.n),
        n_calls=n_calls,
        n_calls_initial=int(init_idx.size),
        n_calls_adaptive=n_calls - int(init_idx.size),
        eps_max_hat=eps_hat,
        n_pool=pool.n,
        converged=converged,
        flags=flags,
        trace=trace,
        wall_time=time.perf_counter() - t0,
        model_info=info,
        pool=pool,
        omega2_idx=partition.omega2_idx if partition is not None else np.empty(0, dtype=np.int64),
    )


def run_ak_mcs(g, rv: RandomVector, cfg: EngineConfig) -> RunReport:
    if cfg.method != "AKMCS":
        raise ValueError("config method must be AKMCS")
    return _run_adaptive(g, rv, cfg)


def run_iskra(g, rv: RandomVector, cfg: EngineConfig) -> RunReport:
    if cfg.method != "ISKRA":
        raise ValueError("config method must be ISKRA")
    return _run_adaptive(g, rv, cfg)


def run_reak(g, rv: RandomVector, cfg: EngineConfig) -> RunReport:
    if cfg.method != "REAK":
        raise ValueError("config method must be REAK")
    return _run_adaptive(g, rv, cfg)


def run_engine(g, rv: RandomVector, cfg: EngineConfig) -> RunReport:
    """Dispatch on ``cfg.method``."""
    if cfg.method == "MCS":
        return crude_mcs(g, rv, cfg.n_pool_initial, cfg.seed)
    return _run_adaptive(g, rv, cfg)
