# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: Gaussian correlations, feasibility scores and the
Poisson-binomial CDF. The NumPy twin lives in ``_kernels_py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport erfc, exp, fabs, sqrt

cnp.import_array()

cdef double INV_SQRT_2 = 0.7071067811865476
cdef double INV_SQRT_2PI = 0.3989422804014327


cdef inline double _norm_cdf(double z) noexcept nogil:
    return 0.5 * erfc(-z * INV_SQRT_2)


cdef inline double _norm_pdf(double z) noexcept nogil:
    return INV_SQRT_2PI * exp(-0.5 * z * z)


def corr_from_sqd(const double[:, ::1] sqd, const double[::1] theta, Py_ssize_t m):
    """Correlation matrix from condensed per-dimension squared distances."""
    cdef Py_ssize_t d = theta.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, m))
    cdef double[:, ::1] r = out
    cdef Py_ssize_t i, j, l, k = 0
    cdef double s, v
    with nogil:
        for i in range(m):
            r[i, i] = 1.0
            for j in range(i + 1, m):
                s = 0.0
                for l in range(d):
                    s += theta[l] * sqd[k, l]
                v = exp(-s)
                r[i, j] = v
                r[j, i] = v
                k += 1
    return out


def cross_corr(const double[:, ::1] xq, const double[:, ::1] xt, const double[::1] theta):
    """(nq, m) Gaussian correlations exp(-sum_k theta_k (xq - xt)^2)."""
    cdef Py_ssize_t nq = xq.shape[0]
    cdef Py_ssize_t m = xt.shape[0]
    cdef Py_ssize_t d = theta.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nq, m))
    cdef double[:, ::1] r = out
    cdef Py_ssize_t i, j, l
    cdef double s, diff
    with nogil:
        for i in range(nq):
            for j in range(m):
                s = 0.0
                for l in range(d):
                    diff = xq[i, l] - xt[j, l]
                    s += theta[l] * diff * diff
                r[i, j] = exp(-s)
    return out


def eff_values(const double[::1] mean, const double[::1] sd):
    """Expected feasibility of the zero level set with envelope +-2 sd."""
    cdef Py_ssize_t n = mean.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double mu, s, t, val
    with nogil:
        for i in range(n):
            s = sd[i]
            if s > 0.0:
                mu = mean[i]
                t = -mu / s
                val = (
                    mu * (2.0 * _norm_cdf(t) - _norm_cdf(t - 2.0) - _norm_cdf(t + 2.0))
                    - s * (2.0 * _norm_pdf(t) - _norm_pdf(t - 2.0) - _norm_pdf(t + 2.0))
                    + 2.0 * s * (_norm_cdf(t + 2.0) - _norm_cdf(t - 2.0))
                )
                o[i] = val if val > 0.0 else 0.0
    return out


def wrong_sign_probs(const double[::1] mean, const double[::1] sd):
    """Phi(-|mean|/sd); 0 for sd = 0 unless mean = 0, which gives 0.5."""
    cdef Py_ssize_t n = mean.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            if sd[i] > 0.0:
                o[i] = _norm_cdf(-fabs(mean[i]) / sd[i])
            else:
                o[i] = 0.5 if mean[i] == 0.0 else 0.0
    return out


def poisson_binomial_cdf(const double[::1] probs):
    """Exact CDF of a sum of independent Bernoulli(p_i), length n + 1."""
    cdef Py_ssize_t n = probs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n + 1)
    cdef double[::1] pmf = out
    cdef Py_ssize_t k, j
    cdef double p, acc
    pmf[0] = 1.0
    with nogil:
        for k in range(n):
            p = probs[k]
            for j in range(k + 1, 0, -1):
                pmf[j] = pmf[j] * (1.0 - p) + pmf[j - 1] * p
            pmf[0] *= 1.0 - p
        acc = 0.0
        for j in range(n + 1):
            acc += pmf[j]
            if acc > 1.0:
                acc = 1.0
            pmf[j] = acc
        pmf[n] = 1.0
    return out
