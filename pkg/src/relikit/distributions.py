"""Marginal distributions, independent random vectors and seeded sampling.

Three marginal families are supported: normal and Gumbel (parameterized by
mean / standard deviation) and uniform (lower / upper bound). Joint models
are products of independent marginals. Sampling is available as plain
inverse-CDF Monte Carlo and as Latin Hypercube Sampling with one point per
probability stratum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from ._streams import substream

EULER_GAMMA = 0.5772156649015329
_SQRT_2PI = np.sqrt(2.0 * np.pi)
# inverse-CDF sampling clips uniforms to this open interval so every
# realization stays finite
_U_EPS = 1e-16

MARGINAL_KINDS = ("normal", "uniform", "gumbel")


@dataclass(frozen=True)
class Marginal:
    """One marginal distribution.

    ``param1``/``param2`` are mean/std for ``normal`` and ``gumbel`` and
    lower/upper bound for ``uniform``. The Gumbel family is the max-type
    distribution matching the requested first two moments:
    scale = std*sqrt(6)/pi, location = mean - EULER_GAMMA*scale.
    """

    kind: str
    param1: float
    param2: float
    name: str = ""

    def __post_init__(self):
        if self.kind not in MARGINAL_KINDS:
            raise ValueError(f"unknown marginal kind {self.kind!r}; expected one of {MARGINAL_KINDS}")
        if not (np.isfinite(self.param1) and np.isfinite(self.param2)):
            raise ValueError(f"marginal parameters must be finite, got ({self.param1}, {self.param2})")
        if self.kind == "uniform":
            if not self.param1 < self.param2:
                raise ValueError(f"uniform requires lower < upper, got ({self.param1}, {self.param2})")
        else:
            if not self.param2 > 0:
                raise ValueError(f"{self.kind} requires std > 0, got {self.param2}")

    @property
    def _gumbel_scale(self) -> float:
        return self.param2 * np.sqrt(6.0) / np.pi

    @property
    def _gumbel_loc(self) -> float:
        return self.param1 - EULER_GAMMA * self._gumbel_scale

    def pdf(self, x):
        """Probability density at ``x`` (scalar or array)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "normal":
            z = (x - self.param1) / self.param2
            out = np.exp(-0.5 * z * z) / (self.param2 * _SQRT_2PI)
        elif self.kind == "uniform":
            inside = (x >= self.param1) & (x <= self.param2)
            out = np.where(inside, 1.0 / (self.param2 - self.param1), 0.0)
        else:
            beta = self._gumbel_scale
            z = (x - self._gumbel_loc) / beta
            out = np.exp(-(z + np.exp(-z))) / beta
        return out if out.ndim else float(out)

    def cdf(self, x):
        """Cumulative distribution at ``x``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "normal":
            out = special.ndtr((x - self.param1) / self.param2)
        elif self.kind == "uniform":
            out = np.clip((x - self.param1) / (self.param2 - self.param1), 0.0, 1.0)
        else:
            z = (x - self._gumbel_loc) / self._gumbel_scale
            out = np.exp(-np.exp(-z))
        return out if out.ndim else float(out)

    def ppf(self, u):
        """Inverse CDF for ``u`` in the open interval (0, 1)."""
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0.0) or np.any(u >= 1.0):
            raise ValueError("ppf argument must lie strictly inside (0, 1)")
        if self.kind == "normal":
            out = self.param1 + self.param2 * special.ndtri(u)
        elif self.kind == "uniform":
            out = self.param1 + (self.param2 - self.param1) * u
        else:
            out = self._gumbel_loc - self._gumbel_scale * np.log(-np.log(u))
        return out if out.ndim else float(out)


def marginal_pdf(m: Marginal, x):
    return m.pdf(x)


def marginal_cdf(m: Marginal, x):
    return m.cdf(x)


def marginal_inverse_cdf(m: Marginal, u):
    return m.ppf(u)


class RandomVector:
    """Joint model of independent marginals."""

    def __init__(self, marginals):
        marginals = tuple(marginals)
        if len(marginals) < 1:
            raise ValueError("RandomVector needs at least one marginal")
        self.marginals = marginals

    @property
    def n_r(self) -> int:
        return len(self.marginals)

    @classmethod
    def from_specs(cls, specs) -> "RandomVector":
        """Build from a list of ``{name, kind, param1, param2}`` mappings."""
        margs = []
        for i, spec in enumerate(specs):
            extra = set(spec) - {"name", "kind", "param1", "param2"}
            if extra:
                raise ValueError(f"variable {i}: unknown keys {sorted(extra)}")
            try:
                margs.append(
                    Marginal(
                        kind=str(spec["kind"]),
                        param1=float(spec["param1"]),
                        param2=float(spec["param2"]),
                        name=str(spec.get("name", f"x{i + 1}")),
                    )
                )
            except KeyError as missing:
                raise ValueError(f"variable {i}: missing key {missing}") from None
        return cls(margs)

    def joint_pdf(self, x):
        """Joint density: the left-to-right product of the marginal pdfs.

        Accepts a single point of length ``n_r`` or an (n, n_r) matrix.
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if pts.shape[-1] != self.n_r:
            raise ValueError(f"expected points of dimension {self.n_r}, got {pts.shape[-1]}")
        out = np.ones(pts.shape[0])
        for j, m in enumerate(self.marginals):
            out *= m.pdf(pts[:, j])
        return float(out[0]) if single else out


@dataclass(frozen=True)
class SampleMatrix:
    """Realization matrix, one row per design point, plus the seed used."""

    values: np.ndarray
    seed: object

    @property
    def rows(self) -> int:
        return self.values.shape[0]


def lhs_sample(rv: RandomVector, n: int, seed) -> SampleMatrix:
    """Latin Hypercube sample of size ``n``.

    Per dimension the n probability strata ((k-1)/n, k/n) each receive one
    point at a uniform random position, with strata independently permuted.
    Deterministic given ``seed``.
    """
    if n < 1:
        raise ValueError("lhs_sample needs n >= 1")
    rng = substream(seed, 101)
    x = np.empty((n, rv.n_r))
    for j, m in enumerate(rv.marginals):
        perm = rng.permutation(n)
        u = (perm + rng.random(n)) / n
        np.clip(u, _U_EPS, 1.0 - _U_EPS, out=u)
        x[:, j] = m.ppf(u)
    return SampleMatrix(values=x, seed=seed)


def plain_sample(rv: RandomVector, n: int, seed) -> SampleMatrix:
    """Plain i.i.d. inverse-CDF sample; used for incremental pool growth
    where LHS strata cannot be extended. ``n = 0`` gives an empty matrix."""
    if n < 0:
        raise ValueError("plain_sample needs n >= 0")
    rng = substream(seed, 102)
    u = rng.random((n, rv.n_r))
    np.clip(u, _U_EPS, 1.0 - _U_EPS, out=u)
    x = np.empty((n, rv.n_r))
    for j, m in enumerate(rv.marginals):
        x[:, j] = m.ppf(u[:, j]) if n else np.empty(0)
    return SampleMatrix(values=x, seed=seed)
