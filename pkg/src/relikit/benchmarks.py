"""Built-in benchmark problems.

Four analytic limit states of increasing dimension, each bundled with its
random-variable model, a published crude-Monte-Carlo reference estimate
for cross-checking (see README), and per-benchmark engine defaults. All
evaluators are pure, vectorized and reentrant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Marginal, RandomVector
from .evaluators import LimitState

_SQRT2 = np.sqrt(2.0)

# the tube geometry loads two of the forces at fixed angles
TUBE_THETA1 = np.deg2rad(5.0)
TUBE_THETA2 = np.deg2rad(10.0)


def series_system(x1, x2):
    """Four-branch series system over two standard normals; the response is
    the worst (minimum) branch margin."""
    sq = 0.1 * (x1 - x2) ** 2
    s = (x1 + x2) / _SQRT2
    b1 = 3.0 + sq - s
    b2 = 3.0 + sq + s
    b3 = (x1 - x2) + 6.0 / _SQRT2
    b4 = -(x1 - x2) + 6.0 / _SQRT2
    return np.minimum(np.minimum(b1, b2), np.minimum(b3, b4))


def rastrigin_mod(x1, x2):
    """Oscillatory two-dimensional margin 10 - sum(x_i^2 - 5 cos(2 pi x_i));
    the failure set splits into many disjoint pockets."""
    return 10.0 - (x1**2 - 5.0 * np.cos(2.0 * np.pi * x1)) - (x2**2 - 5.0 * np.cos(2.0 * np.pi * x2))


def oscillator(c1, c2, m, r, t1, F1):
    """Undamped single-degree-of-freedom oscillator under a rectangular
    pulse: displacement capacity 3r minus the peak response."""
    c1, c2, m = np.asarray(c1, dtype=float), np.asarray(c2, dtype=float), np.asarray(m, dtype=float)
    if np.any(m <= 0.0) or np.any(c1 + c2 <= 0.0):
        raise ValueError("oscillator requires positive mass and total stiffness")
    w0_sq = (c1 + c2) / m
    w0 = np.sqrt(w0_sq)
    return 3.0 * r - np.abs(2.0 * F1 / (m * w0_sq) * np.sin(w0 * t1 / 2.0))


def cantilever_tube(t, d, F1, F2, T, sigma_cap, L1, L2, P):
    """Cantilever tube margin: strength capacity minus the peak von Mises
    stress from two inclined tip forces, an axial force and a torque.

    Canonical units are N, mm and MPa; the bundled random-variable model
    already converts forces (kN -> N) and torque (N*m -> N*mm).
    """
    t, d = np.asarray(t, dtype=float), np.asarray(d, dtype=float)
    if np.any(t <= 0.0) or np.any(d - 2.0 * t <= 0.0):
        raise ValueError("cantilever_tube requires d > 2t > 0")
    inner = d - 2.0 * t
    area = np.pi / 4.0 * (d**2 - inner**2)
    moment = F1 * L1 * np.cos(TUBE_THETA1) + F2 * L2 * np.cos(TUBE_THETA2)
    c = d / 2.0
    inertia = np.pi / 64.0 * (d**4 - inner**4)
    sigma_x = (P + F1 * np.sin(TUBE_THETA1) + F2 * np.sin(TUBE_THETA2)) / area + moment * c / inertia
    tau_zx = T * d / (4.0 * inertia)  # J = 2 I
    return sigma_cap - np.sqrt(sigma_x**2 + 3.0 * tau_zx**2)


@dataclass(frozen=True)
class Benchmark:
    """Registered problem: evaluator, random model and engine defaults."""

    name: str
    rv: RandomVector
    g: LimitState
    reference_pf: float
    reference_cov: float
    reference_n: int
    default_cov_thr: float
    default_gamma: float
    default_max_calls: int
    description: str

    @property
    def n_r(self) -> int:
        return self.rv.n_r


def _series4() -> Benchmark:
    rv = RandomVector([Marginal("normal", 0.0, 1.0, "x1"), Marginal("normal", 0.0, 1.0, "x2")])
    g = LimitState(lambda x: series_system(x[:, 0], x[:, 1]), 2, "series4")
    return Benchmark(
        name="series4",
        rv=rv,
        g=g,
        reference_pf=4.498e-3,
        reference_cov=0.015,
        reference_n=10**6,
        default_cov_thr=0.015,
        default_gamma=20.0,
        default_max_calls=910,
        description="four-branch series system, 2 standard normals",
    )


def _rastrigin2() -> Benchmark:
    rv = RandomVector([Marginal("normal", 0.0, 1.0, "x1"), Marginal("normal", 0.0, 1.0, "x2")])
    g = LimitState(lambda x: rastrigin_mod(x[:, 0], x[:, 1]), 2, "rastrigin2")
    return Benchmark(
        name="rastrigin2",
        rv=rv,
        g=g,
        reference_pf=7.308e-2,
        reference_cov=0.015,
        reference_n=6 * 10**4,
        default_cov_thr=0.015,
        default_gamma=5.0,
        default_max_calls=5104,
        description="oscillatory margin with disjoint failure pockets, 2 standard normals",
    )


def _oscillator6() -> Benchmark:
    rv = RandomVector(
        [
            Marginal("normal", 1.0, 0.1, "c1"),
            Marginal("normal", 0.1, 0.01, "c2"),
            Marginal("normal", 1.0, 0.05, "m"),
            Marginal("normal", 0.5, 0.05, "r"),
            Marginal("normal", 1.0, 0.2, "t1"),
            Marginal("normal", 1.0, 0.2, "F1"),
        ]
    )
    g = LimitState(
        lambda x: oscillator(x[:, 0], x[:, 1], x[:, 2], x[:, 3], x[:, 4], x[:, 5]),
        6,
        "oscillator6",
    )
    return Benchmark(
        name="oscillator6",
        rv=rv,
        g=g,
        reference_pf=2.847e-2,
        reference_cov=0.022,
        reference_n=7 * 10**4,
        default_cov_thr=0.022,
        default_gamma=5.0,
        default_max_calls=606,
        description="nonlinear oscillator under pulse load, 6 normals",
    )


def _tube9() -> Benchmark:
    # raw data sheet mixes mm, kN, N*m and MPa; converted here once so the
    # evaluator works in closed N-mm-MPa units
    rv = RandomVector(
        [
            Marginal("normal", 5.0, 0.1, "t"),
            Marginal("normal", 42.0, 0.5, "d"),
            Marginal("normal", 3000.0, 300.0, "F1"),
            Marginal("normal", 3000.0, 300.0, "F2"),
            Marginal("normal", 90_000.0, 9_000.0, "T"),
            Marginal("normal", 220.0, 22.0, "sigma_cap"),
            Marginal("uniform", 119.75, 120.25, "L1"),
            Marginal("uniform", 59.75, 60.25, "L2"),
            Marginal("gumbel", 27_000.0, 2_700.0, "P"),
        ]
    )
    g = LimitState(
        lambda x: cantilever_tube(
            x[:, 0], x[:, 1], x[:, 2], x[:, 3], x[:, 4], x[:, 5], x[:, 6], x[:, 7], x[:, 8]
        ),
        9,
        "tube9",
    )
    return Benchmark(
        name="tube9",
        rv=rv,
        g=g,
        reference_pf=6.850e-3,
        reference_cov=0.049,
        reference_n=6 * 10**4,
        default_cov_thr=0.05,
        default_gamma=5.0,
        default_max_calls=831,
        description="cantilever tube von Mises margin, 9 mixed marginals",
    )


BENCHMARKS: dict[str, Benchmark] = {
    b.name: b for b in (_series4(), _rastrigin2(), _oscillator6(), _tube9())
}


def get_benchmark(name: str) -> Benchmark:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; available: {sorted(BENCHMARKS)}") from None
