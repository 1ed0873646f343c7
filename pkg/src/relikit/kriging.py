"""Ordinary Kriging with an anisotropic Gaussian kernel.

The constant-basis regression coefficient and the process variance are
profiled out analytically; kernel ranges are picked by minimizing the
concentrated likelihood |R|^(1/m) * sigma^2 with a seeded multistart
compass search over log-scaled ranges. Training inputs are standardized
per dimension before fitting, so the (0, 10] range box refers to the
normalized scale; queries are transformed transparently.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import kernels
from ._streams import substream

THETA_BOUNDS = (1e-3, 10.0)
START_RANGE = (1e-2, 10.0)
NUGGET_MAX = 1e-6
DUPLICATE_TOL = 1e-12


class IllConditionedModelError(RuntimeError):
    """Correlation matrix stayed non-factorizable at the maximum nugget."""


class DuplicateTrainingPointError(ValueError):
    """Two training rows coincide within the duplicate tolerance."""


@dataclass(frozen=True)
class Prediction:
    mean: float
    variance: float


@dataclass(frozen=True)
class PredictionBatch:
    """Batch predictions with the variance clamp bookkeeping."""

    mean: np.ndarray
    variance: np.ndarray
    n_clamped: int
    min_raw_variance: float

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(self.variance)


@dataclass(frozen=True)
class CorrelationFactor:
    """Lower-triangular Cholesky factor of R + nugget*I."""

    lower: np.ndarray
    nugget: float


def gaussian_correlation(x, w, theta) -> float:
    """Separable Gaussian correlation prod_i exp(-theta_i (x_i - w_i)^2)."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if not (x.shape == w.shape == theta.shape):
        raise ValueError(f"dimension mismatch: x {x.shape}, w {w.shape}, theta {theta.shape}")
    if np.any(theta <= 0):
        raise ValueError("theta components must be positive")
    return float(np.exp(-np.sum(theta * (x - w) ** 2)))


def _condensed_diffs(x: np.ndarray) -> np.ndarray:
    iu, ju = np.triu_indices(x.shape[0], 1)
    return x[iu] - x[ju]


def _check_duplicates(diffs: np.ndarray):
    if diffs.shape[0] == 0:
        return
    cheb = np.abs(diffs).max(axis=1)
    if cheb.min() <= DUPLICATE_TOL:
        raise DuplicateTrainingPointError(
            f"training rows coincide within {DUPLICATE_TOL:g} per coordinate"
        )


def _cholesky_with_nugget(r: np.ndarray, m: int) -> tuple[np.ndarray, float]:
    """Factorize r + nugget*I, escalating the nugget tenfold up to NUGGET_MAX."""
    nugget = 1e-12 * m
    diag = np.diag(r).copy()
    while True:
        r[np.diag_indices_from(r)] = diag + nugget
        try:
            return np.linalg.cholesky(r), nugget
        except np.linalg.LinAlgError:
            nugget *= 10.0
            if nugget > NUGGET_MAX:
                raise IllConditionedModelError(
                    f"correlation matrix not positive definite at nugget {NUGGET_MAX:g}"
                ) from None


class _ProfiledFit:
    """GLS pieces for a fixed theta: beta, sigma2 and solver workspaces."""

    __slots__ = ("beta", "sigma2", "lower", "nugget", "ft", "resid_t", "ftf", "log_psi")

    def __init__(self, sqd: np.ndarray, y: np.ndarray, theta: np.ndarray, m: int):
        theta = np.ascontiguousarray(theta, dtype=float)
        r = kernels.corr_from_sqd(sqd, theta, m)
        self.lower, self.nugget = _cholesky_with_nugget(r, m)
        self.ft = solve_triangular(self.lower, np.ones(m), lower=True, check_finite=False)
        yt = solve_triangular(self.lower, y, lower=True, check_finite=False)
        self.ftf = float(self.ft @ self.ft)
        self.beta = float(self.ft @ yt) / self.ftf
        self.resid_t = yt - self.ft * self.beta
        self.sigma2 = max(float(self.resid_t @ self.resid_t) / m, 0.0)
        # log(|R|^(1/m) sigma^2); log-diagonal sum avoids determinant overflow
        log_det_part = (2.0 / m) * float(np.sum(np.log(np.diag(self.lower))))
        self.log_psi = log_det_part + float(np.log(max(self.sigma2, 1e-320)))


def profile_beta_sigma2(x, y, theta):
    """Constant-basis GLS coefficient, process variance and the factorized
    correlation matrix for the given (raw, unstandardized) inputs."""
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
    y = np.asarray(y, dtype=float).ravel()
    theta = np.asarray(theta, dtype=float)
    m = x.shape[0]
    if m < 2:
        raise ValueError("need at least 2 training points")
    diffs = _condensed_diffs(x)
    _check_duplicates(diffs)
    sqd = np.ascontiguousarray(diffs * diffs)
    fit = _ProfiledFit(sqd, y, theta, m)
    return fit.beta, fit.sigma2, CorrelationFactor(lower=fit.lower, nugget=fit.nugget)


def log_psi(x, y, theta) -> float:
    """Concentrated likelihood objective log(|R|^(1/m) sigma^2), raw inputs."""
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
    y = np.asarray(y, dtype=float).ravel()
    sqd = np.ascontiguousarray(_condensed_diffs(x) ** 2)
    return _ProfiledFit(sqd, y, np.asarray(theta, dtype=float), x.shape[0]).log_psi


class KrigingModel:
    """Fitted surrogate; immutable, prediction is pure and thread-safe."""

    def __init__(self, x_train, y_train, theta, fit: _ProfiledFit, x_offset, x_scale, xs):
        self.X_train = x_train
        self.y_train = y_train
        self.theta = theta
        self.beta = fit.beta
        self.sigma2 = fit.sigma2
        self.nugget = fit.nugget
        self.corr_factor = CorrelationFactor(lower=fit.lower, nugget=fit.nugget)
        self.x_offset = x_offset
        self.x_scale = x_scale
        self._xs = xs
        self._fit = fit

    @property
    def m(self) -> int:
        return self.X_train.shape[0]

    @property
    def n_r(self) -> int:
        return self.X_train.shape[1]

    def info(self) -> dict:
        return {
            "m": self.m,
            "theta": [float(t) for t in self.theta],
            "beta": self.beta,
            "sigma2": self.sigma2,
            "nugget": self.nugget,
        }

    def predict_batch(self, x, chunk: int | None = None) -> PredictionBatch:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_r:
            raise ValueError(f"expected query dimension {self.n_r}, got {x.shape[1]}")
        n = x.shape[0]
        mean = np.empty(n)
        var = np.empty(n)
        if n == 0:
            return PredictionBatch(mean, var, 0, 0.0)
        if chunk is None:
            chunk = max(1024, int(4e6 / max(self.m, 1)))
        fit = self._fit
        n_clamped = 0
        min_raw = np.inf
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            xs = np.ascontiguousarray((x[lo:hi] - self.x_offset) / self.x_scale)
            r = kernels.cross_corr(xs, self._xs, self.theta)
            # the regularizer is part of the correlation model: queries that
            # coincide with a training point carry it too, so they reproduce
            # the training response exactly
            exact = r == 1.0
            if exact.any():
                r[exact] = 1.0 + self.nugget
            rt = solve_triangular(fit.lower, r.T, lower=True, check_finite=False)
            mean[lo:hi] = self.beta + rt.T @ fit.resid_t
            u = fit.ft @ rt - 1.0
            raw = self.sigma2 * (1.0 - np.einsum("ij,ij->j", rt, rt) + u * u / fit.ftf)
            n_clamped += int(np.count_nonzero(raw < 0.0))
            if raw.size:
                min_raw = min(min_raw, float(raw.min()))
            var[lo:hi] = np.maximum(raw, 0.0)
        return PredictionBatch(mean, var, n_clamped, float(min_raw))

    def predict(self, x) -> Prediction:
        batch = self.predict_batch(np.atleast_2d(np.asarray(x, dtype=float)))
        return Prediction(mean=float(batch.mean[0]), variance=float(batch.variance[0]))


def _prepare(x, y, standardize):
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
    y = np.asarray(y, dtype=float).ravel()
    m = x.shape[0]
    if m < 2:
        raise ValueError("need at least 2 training points")
    if y.shape[0] != m:
        raise ValueError("X and y row counts differ")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("training data must be finite")
    diffs = _condensed_diffs(x)
    _check_duplicates(diffs)
    if standardize:
        offset = x.mean(axis=0)
        scale = x.std(axis=0)
        scale[scale == 0.0] = 1.0
    else:
        offset = np.zeros(x.shape[1])
        scale = np.ones(x.shape[1])
    xs = np.ascontiguousarray((x - offset) / scale)
    sqd = np.ascontiguousarray((diffs / scale) ** 2)
    return x, y, offset, scale, xs, sqd


def fit_with_theta(x, y, theta, standardize: bool = True) -> KrigingModel:
    """Fit with a fixed kernel range vector (no likelihood search)."""
    x, y, offset, scale, xs, sqd = _prepare(x, y, standardize)
    theta = np.ascontiguousarray(np.broadcast_to(np.asarray(theta, dtype=float), (x.shape[1],)))
    fit = _ProfiledFit(sqd, y, theta, x.shape[0])
    return KrigingModel(x, y, theta, fit, offset, scale, xs)


def _compass_search(objective, start_log, lo_log, hi_log, budget):
    """Coordinate pattern search with shrinking step in log10(theta) space.

    Returns ((best_log, best_value), evaluation count). Deterministic.
    """
    d = start_log.shape[0]
    best = np.clip(start_log, lo_log, hi_log)
    f_best = objective(best)
    evals = 1
    step = 0.5
    while evals < budget and step >= 1e-3:
        improved = False
        for i in range(d):
            for delta in (step, -step):
                if evals >= budget:
                    break
                cand = best.copy()
                cand[i] = min(max(cand[i] + delta, lo_log), hi_log)
                if cand[i] == best[i]:
                    continue
                f_cand = objective(cand)
                evals += 1
                if f_cand < f_best:
                    best, f_best = cand, f_cand
                    improved = True
                    break
        if not improved:
            step *= 0.5
    return (best, f_best), evals


def mle_fit(
    x,
    y,
    *,
    theta_bounds: tuple[float, float] = THETA_BOUNDS,
    n_starts: int = 5,
    budget: int | None = None,
    seed=0,
    theta0=None,
    standardize: bool = True,
) -> KrigingModel:
    """Maximum-likelihood fit over theta in the bounds box.

    The search runs a compass pattern search from ``n_starts`` log-uniform
    starting points (plus ``theta0`` if given, e.g. a previous fit for warm
    restarts) and keeps the best concentrated-likelihood value seen.
    Deterministic for fixed (x, y, seed).
    """
    x, y, offset, scale, xs, sqd = _prepare(x, y, standardize)
    m, d = x.shape
    if budget is None:
        budget = 200 * d
    lo_log, hi_log = np.log10(theta_bounds[0]), np.log10(theta_bounds[1])

    cache: dict[tuple, tuple[float, _ProfiledFit | None]] = {}

    def objective(theta_log):
        key = tuple(np.round(theta_log, 12))
        hit = cache.get(key)
        if hit is not None:
            return hit[0]
        try:
            fit = _ProfiledFit(sqd, y, np.ascontiguousarray(10.0**theta_log), m)
            value = fit.log_psi
        except IllConditionedModelError:
            fit, value = None, np.inf
        cache[key] = (value, fit)
        return value

    starts = []
    if theta0 is not None:
        t0 = np.broadcast_to(np.asarray(theta0, dtype=float), (d,))
        starts.append(np.clip(np.log10(t0), lo_log, hi_log))
    rng = substream(seed, 201)
    s_lo, s_hi = np.log10(START_RANGE[0]), np.log10(START_RANGE[1])
    for _ in range(n_starts):
        starts.append(rng.uniform(s_lo, s_hi, size=d))
    if not starts:
        raise ValueError("mle_fit needs n_starts >= 1 or an explicit theta0")

    per_start = max(10, budget // len(starts))
    best_log, best_val = None, np.inf
    for s in starts:
        (cand_log, cand_val), _ = _compass_search(objective, s, lo_log, hi_log, per_start)
        if cand_val < best_val:
            best_log, best_val = cand_log, cand_val
    if best_val == np.inf:
        raise IllConditionedModelError("every likelihood start failed to factorize")

    theta = np.ascontiguousarray(10.0**best_log)
    fit = cache[tuple(np.round(best_log, 12))][1]
    if fit is None:  # pragma: no cover - inf values never win
        fit = _ProfiledFit(sqd, y, theta, m)
    return KrigingModel(x, y, theta, fit, offset, scale, xs)
