"""Agreement between the compiled kernels and the NumPy fallback."""
import numpy as np
import pytest

from relikit import _kernels_py as kpy
from relikit import kernels


def _compiled_or_skip():
    if kernels.BACKEND != "compiled":
        pytest.skip("compiled kernel extension not available")
    return kernels


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(42)


def test_backend_reports_name():
    assert kernels.backend_name() in ("compiled", "python")


def test_corr_from_sqd_backends_agree(rng):
    kc = _compiled_or_skip()
    for m, d in [(2, 1), (7, 3), (40, 9)]:
        x = np.ascontiguousarray(rng.normal(size=(m, d)))
        iu, ju = np.triu_indices(m, 1)
        sqd = np.ascontiguousarray((x[iu] - x[ju]) ** 2)
        theta = np.ascontiguousarray(rng.uniform(0.05, 5.0, d))
        a = kc.corr_from_sqd(sqd, theta, m)
        b = kpy.corr_from_sqd(sqd, theta, m)
        assert np.allclose(a, b, rtol=1e-13, atol=0)
        assert np.allclose(a, a.T) and np.allclose(np.diag(a), 1.0)


def test_cross_corr_backends_agree(rng):
    kc = _compiled_or_skip()
    xq = np.ascontiguousarray(rng.normal(size=(31, 4)))
    xt = np.ascontiguousarray(rng.normal(size=(9, 4)))
    theta = np.ascontiguousarray(rng.uniform(0.1, 3.0, 4))
    a = kc.cross_corr(xq, xt, theta)
    b = kpy.cross_corr(xq, xt, theta)
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)


def test_cross_corr_bounds_and_self(rng):
    x = np.ascontiguousarray(rng.normal(size=(5, 3)))
    theta = np.ascontiguousarray(np.full(3, 0.7))
    r = kernels.cross_corr(x, x, theta)
    assert np.allclose(np.diag(r), 1.0)
    assert np.all(r > 0) and np.all(r <= 1.0)


def test_eff_and_wrong_sign_backends_agree(rng):
    kc = _compiled_or_skip()
    mean = np.ascontiguousarray(rng.normal(scale=3, size=500))
    sd = np.ascontiguousarray(np.abs(rng.normal(size=500)))
    sd[::17] = 0.0
    mean[::34] = 0.0
    assert np.allclose(kc.eff_values(mean, sd), kpy.eff_values(mean, sd), rtol=1e-11, atol=1e-15)
    assert np.allclose(
        kc.wrong_sign_probs(mean, sd), kpy.wrong_sign_probs(mean, sd), rtol=1e-11, atol=1e-16
    )


def test_poisson_binomial_cdf_backends_agree(rng):
    kc = _compiled_or_skip()
    for n in (1, 5, 60, 300):
        p = np.ascontiguousarray(rng.uniform(0, 1, n))
        a = kc.poisson_binomial_cdf(p)
        b = kpy.poisson_binomial_cdf(p)
        assert a.shape == (n + 1,)
        assert np.allclose(a, b, atol=1e-13)
        assert a[-1] == 1.0 and np.all(np.diff(a) >= -1e-15)


def test_poisson_binomial_cdf_matches_binomial():
    from scipy import stats

    p = np.full(12, 0.3)
    cdf = kernels.poisson_binomial_cdf(np.ascontiguousarray(p))
    ref = stats.binom.cdf(np.arange(13), 12, 0.3)
    assert np.allclose(cdf, ref, atol=1e-12)
