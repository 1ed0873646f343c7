"""Density partition of the candidate pool and the maximum-error-rate bound.

The pool splits into a high-density region that the learning loop refines
and a low-density remainder whose empirical probability mass is
``esr_alpha * pf_ref``. Sign uncertainty over the remainder is summarized
by confidence bounds on the wrong-sign-estimate counts: a normal interval
on the predicted-safe side and a Poisson-binomial quantile on the
predicted-fail side. Combining the two gives a conservative bound on the
relative error of the failure-probability estimate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from ._streams import substream

EXACT_QUANTILE_MAX_N = 1000
MC_DRAWS_DEFAULT = 100_000


@dataclass(frozen=True)
class EsrPartition:
    """Index split of a candidate pool by joint density."""

    esr_alpha: float
    rho_thr: float
    omega1_idx: np.ndarray
    omega2_idx: np.ndarray
    pf_ref: float
    degenerate: bool = False

    @property
    def n_omega2(self) -> int:
        return self.omega2_idx.shape[0]

    def mask(self, n: int) -> np.ndarray:
        """Boolean membership of the refined (high-density) region."""
        m = np.ones(n, dtype=bool)
        m[self.omega2_idx] = False
        return m


def density_order(density: np.ndarray) -> np.ndarray:
    """Stable ascending-density index order used to carve partitions."""
    return np.argsort(density, kind="stable")


def build_partition(pool, esr_alpha: float, pf_ref: float, order: np.ndarray | None = None) -> EsrPartition:
    """Exclude the lowest-density points whose empirical mass is
    ``esr_alpha * pf_ref``; k = round-half-even of that mass times the pool
    size. ``pool`` is a density array or any object with a ``density``
    attribute; ``order`` may pass a precomputed stable density argsort.
    """
    density = np.asarray(getattr(pool, "density", pool), dtype=float)
    if esr_alpha < 0:
        raise ValueError("esr_alpha must be >= 0")
    if pf_ref < 0 or pf_ref > 1:
        raise ValueError("pf_ref must lie in [0, 1]")
    n = density.shape[0]
    if order is None:
        order = density_order(density)
    k = int(np.round(esr_alpha * pf_ref * n))
    degenerate = k > n
    k = min(max(k, 0), n)
    omega2 = np.sort(order[:k])
    omega1 = np.sort(order[k:])
    rho_thr = float(density[order[k - 1]]) if k > 0 else 0.0
    return EsrPartition(
        esr_alpha=float(esr_alpha),
        rho_thr=rho_thr,
        omega1_idx=omega1,
        omega2_idx=omega2,
        pf_ref=float(pf_ref),
        degenerate=degenerate,
    )


def poisson_binomial_quantile(
    probs,
    q: float,
    method: str = "auto",
    mc_draws: int = MC_DRAWS_DEFAULT,
    seed=0,
) -> int:
    """Smallest integer k with CDF(k) >= q for a sum of Bernoulli(p_i).

    ``exact`` runs the O(n^2) convolution; ``mc`` takes the empirical
    quantile of simulated sums; ``auto`` picks exact for n <= 1000.
    """
    probs = np.asarray(probs, dtype=float)
    if np.any((probs < 0) | (probs > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    n = probs.shape[0]
    if n == 0:
        return 0
    if method == "auto":
        method = "exact" if n <= EXACT_QUANTILE_MAX_N else "mc"
    if method == "exact":
        cdf = kernels.poisson_binomial_cdf(np.ascontiguousarray(probs))
        return int(np.searchsorted(cdf, q, side="left"))
    if method != "mc":
        raise ValueError(f"unknown method {method!r}")
    rng = substream(seed, 301)
    sums = np.zeros(mc_draws, dtype=np.int64)
    block = max(1, int(4e6 / mc_draws))
    for lo in range(0, n, block):
        p_block = probs[lo : lo + block]
        sums += (rng.random((mc_draws, p_block.shape[0])) < p_block).sum(axis=1)
    rank = min(max(int(np.ceil(q * mc_draws)) - 1, 0), mc_draws - 1)
    return int(np.partition(sums, rank)[rank])


def safe_wse_interval(p_wrong_safe, alpha_ci: float = 1.96) -> tuple[float, float]:
    """Normal-approximation confidence interval for the wrong-sign count
    over predicted-safe points: mu -+ alpha_ci * sigma, floored at 0."""
    p = np.asarray(p_wrong_safe, dtype=float)
    if p.size == 0:
        return (0.0, 0.0)
    mu = float(p.sum())
    sigma = float(np.sqrt((p * (1.0 - p)).sum()))
    return (max(0.0, mu - alpha_ci * sigma), mu + alpha_ci * sigma)


@dataclass(frozen=True)
class WrongSignCounts:
    """Predicted-failure counts and wrong-sign probabilities split by region."""

    n_omega1_fail_hat: int
    n_omega2_fail_hat: int
    p_wrong_safe: np.ndarray
    p_wrong_fail: np.ndarray

    @classmethod
    def from_predictions(cls, pred_fail: np.ndarray, p_wrong: np.ndarray, partition: EsrPartition):
        pred_fail = np.asarray(pred_fail, dtype=bool)
        p_wrong = np.asarray(p_wrong, dtype=float)
        o2 = partition.omega2_idx
        fail2 = pred_fail[o2]
        return cls(
            n_omega1_fail_hat=int(pred_fail[partition.omega1_idx].sum()),
            n_omega2_fail_hat=int(fail2.sum()),
            p_wrong_safe=p_wrong[o2[~fail2]],
            p_wrong_fail=p_wrong[o2[fail2]],
        )


@dataclass(frozen=True)
class ErrorBound:
    """Confidence bounds on the unrefined-region failure count and the
    resulting conservative relative-error estimate."""

    safe_wse_ci: tuple[float, float]
    fail_wse_ci: tuple[float, float]
    n_omega2_fail_range: tuple[float, float]
    eps_max: float
    confidence: float


def _endpoint_ratio(n_fail2_hat: float, n_fail1_hat: float, endpoint: float) -> float:
    num = abs(n_fail2_hat - endpoint)
    den = n_fail1_hat + endpoint
    if num == 0.0 and den == 0.0:
        return 0.0
    if den == 0.0:
        return 1.0  # total-uncertainty sentinel
    return num / den


def max_error_rate(
    counts: WrongSignCounts,
    alpha_ci: float = 1.96,
    confidence_q: float = 0.05,
    seed=0,
    mc_draws: int = MC_DRAWS_DEFAULT,
) -> ErrorBound:
    """Conservative bound on the relative error of the failure estimate.

    The true unrefined-region failure count is bracketed by moving the
    wrong-sign counts to their confidence-bound extremes; the bound is the
    worse relative deviation over the two bracket endpoints. With no
    predicted failures anywhere the bound is the sentinel 1, forcing
    further refinement.
    """
    n1f = counts.n_omega1_fail_hat
    n2f = counts.n_omega2_fail_hat
    fail_lo = poisson_binomial_quantile(counts.p_wrong_fail, confidence_q / 2.0, seed=seed)
    fail_hi = poisson_binomial_quantile(
        counts.p_wrong_fail, 1.0 - confidence_q / 2.0, seed=seed, mc_draws=mc_draws
    )
    safe_ci = safe_wse_interval(counts.p_wrong_safe, alpha_ci=alpha_ci)
    range_lo = max(0.0, n2f - fail_hi)
    range_hi = n2f + safe_ci[1]
    eps_max = max(
        _endpoint_ratio(n2f, n1f, range_lo),
        _endpoint_ratio(n2f, n1f, range_hi),
    )
    if n1f == 0 and n2f == 0:
        eps_max = max(eps_max, 1.0)
    return ErrorBound(
        safe_wse_ci=safe_ci,
        fail_wse_ci=(float(fail_lo), float(fail_hi)),
        n_omega2_fail_range=(range_lo, range_hi),
        eps_max=eps_max,
        confidence=1.0 - confidence_q,
    )
