"""NumPy implementations of the hot kernels.

Mirrors the compiled extension in ``_kernels.pyx``; selected at import time
by :mod:`relikit.kernels` when the extension is unavailable or disabled.
"""
from __future__ import annotations

import numpy as np
from scipy import special

_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu(m: int):
    pair = _TRIU_CACHE.get(m)
    if pair is None:
        pair = np.triu_indices(m, 1)
        if len(_TRIU_CACHE) > 8:
            _TRIU_CACHE.clear()
        _TRIU_CACHE[m] = pair
    return pair


def corr_from_sqd(sqd: np.ndarray, theta: np.ndarray, m: int) -> np.ndarray:
    """Correlation matrix from condensed per-dimension squared distances.

    ``sqd`` has one row per (i < j) pair in row-major upper-triangle order.
    """
    vals = np.exp(-(sqd @ theta))
    r = np.empty((m, m))
    iu, ju = _triu(m)
    r[iu, ju] = vals
    r[ju, iu] = vals
    np.fill_diagonal(r, 1.0)
    return r


def cross_corr(xq: np.ndarray, xt: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """(nq, m) Gaussian correlations exp(-sum_k theta_k (xq - xt)^2)."""
    tq = xq * theta
    # expansion a.a + b.b - 2 a.b; clamp tiny negative round-off before exp
    sq = (tq * xq).sum(axis=1)[:, None] + (xt * xt * theta).sum(axis=1)[None, :] - 2.0 * (tq @ xt.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq, out=sq)


def eff_values(mean: np.ndarray, sd: np.ndarray) -> np.ndarray:
    """Expected feasibility of the zero level set with envelope +-2 sd.

    Zero where sd = 0; tiny negative round-off is clipped to zero.
    """
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    out = np.zeros(mean.shape)
    ok = sd > 0.0
    if np.any(ok):
        mu = mean[ok]
        s = sd[ok]
        t = -mu / s
        cdf_t = special.ndtr(t)
        cdf_lo = special.ndtr(t - 2.0)
        cdf_hi = special.ndtr(t + 2.0)
        pdf_t = np.exp(-0.5 * t * t)
        pdf_lo = np.exp(-0.5 * (t - 2.0) ** 2)
        pdf_hi = np.exp(-0.5 * (t + 2.0) ** 2)
        inv_sqrt_2pi = 0.3989422804014327
        val = (
            mu * (2.0 * cdf_t - cdf_lo - cdf_hi)
            - s * inv_sqrt_2pi * (2.0 * pdf_t - pdf_lo - pdf_hi)
            + 2.0 * s * (cdf_hi - cdf_lo)
        )
        out[ok] = np.maximum(val, 0.0)
    return out


def wrong_sign_probs(mean: np.ndarray, sd: np.ndarray) -> np.ndarray:
    """P(predicted sign wrong) = Phi(-|mean|/sd); 0 for sd = 0 unless the
    mean is also 0, which gives the indifferent value 0.5."""
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    out = np.where(mean == 0.0, 0.5, 0.0)
    ok = sd > 0.0
    if np.any(ok):
        out[ok] = special.ndtr(-np.abs(mean[ok]) / sd[ok])
    return out


def poisson_binomial_cdf(probs: np.ndarray) -> np.ndarray:
    """Exact CDF of a sum of independent Bernoulli(p_i), length n + 1.

    O(n^2) convolution of the probability generating function.
    """
    probs = np.asarray(probs, dtype=float)
    n = probs.shape[0]
    pmf = np.zeros(n + 1)
    pmf[0] = 1.0
    for k, p in enumerate(probs):
        pmf[1 : k + 2] = pmf[1 : k + 2] * (1.0 - p) + pmf[: k + 1] * p
        pmf[0] *= 1.0 - p
    cdf = np.cumsum(pmf)
    np.clip(cdf, 0.0, 1.0, out=cdf)
    cdf[-1] = 1.0
    return cdf
