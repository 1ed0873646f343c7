"""Kernel backend selection.

Imports the compiled extension when present, otherwise the NumPy fallback.
Set the environment variable ``RELIKIT_PURE_PYTHON=1`` to force the
fallback. ``BACKEND`` reports which implementation is active.
"""
from __future__ import annotations

import os

if os.environ.get("RELIKIT_PURE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

corr_from_sqd = _impl.corr_from_sqd
cross_corr = _impl.cross_corr
eff_values = _impl.eff_values
wrong_sign_probs = _impl.wrong_sign_probs
poisson_binomial_cdf = _impl.poisson_binomial_cdf


def backend_name() -> str:
    return BACKEND
