"""Acquisition scores over surrogate predictions.

The expected feasibility score drives point selection; the u score and the
wrong-sign probability are exposed alongside it. Selection can be masked to
an effective sampling region, in which case scores outside the mask count
as zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class EmptySelectionError(ValueError):
    """No candidate is selectable (degenerate sampling region mask)."""


def eff(mean, sd, a: float = 0.0):
    """Expected feasibility of the level set g = a with envelope +-2 sd.

    Favors points whose prediction is near the level set and uncertain.
    Zero when sd = 0. Scalars in, scalar out; arrays in, array out.
    """
    mean_arr = np.ascontiguousarray(np.atleast_1d(mean), dtype=float) - a
    sd_arr = np.ascontiguousarray(np.atleast_1d(sd), dtype=float)
    out = kernels.eff_values(mean_arr, sd_arr)
    return float(out[0]) if np.isscalar(mean) or np.ndim(mean) == 0 else out


def u_score(mean, sd):
    """|mean| / sd; infinite for a certain nonzero prediction, 0 for (0, 0)."""
    mean_arr = np.atleast_1d(np.asarray(mean, dtype=float))
    sd_arr = np.atleast_1d(np.asarray(sd, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.abs(mean_arr) / sd_arr
    out[np.isnan(out)] = 0.0  # 0/0
    return float(out[0]) if np.ndim(mean) == 0 else out


def wrong_sign_prob(mean, sd):
    """Probability that sign(mean) disagrees with the true sign."""
    mean_arr = np.ascontiguousarray(np.atleast_1d(mean), dtype=float)
    sd_arr = np.ascontiguousarray(np.atleast_1d(sd), dtype=float)
    out = kernels.wrong_sign_probs(mean_arr, sd_arr)
    return float(out[0]) if np.ndim(mean) == 0 else out


@dataclass(frozen=True)
class AcquisitionScores:
    eff: np.ndarray
    u: np.ndarray
    p_wrong: np.ndarray
    best_index: int
    best_value: float


def masked_argmax(values: np.ndarray, mask: np.ndarray) -> tuple[int, float]:
    """Argmax over masked-in entries; ties break to the lowest index."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise EmptySelectionError("selection mask is empty")
    sub = values[idx]
    j = int(np.argmax(sub))
    return int(idx[j]), float(sub[j])


def score_pool(mean: np.ndarray, sd: np.ndarray, mask: np.ndarray | None = None) -> AcquisitionScores:
    """All three scores over a pool plus the masked feasibility argmax."""
    mean = np.ascontiguousarray(mean, dtype=float)
    sd = np.ascontiguousarray(sd, dtype=float)
    eff_v = kernels.eff_values(mean, sd)
    if mask is None:
        mask = np.ones(mean.shape[0], dtype=bool)
    best_index, best_value = masked_argmax(eff_v, mask)
    return AcquisitionScores(
        eff=eff_v,
        u=u_score(mean, sd),
        p_wrong=kernels.wrong_sign_probs(mean, sd),
        best_index=best_index,
        best_value=best_value,
    )


def select_next(pool, esr_mask: np.ndarray) -> tuple[int, float]:
    """Index and value of the feasibility argmax inside the sampling region.

    ``pool`` must expose fresh ``pred_mean``/``pred_sd`` arrays. Scores
    outside the mask are treated as zero, i.e. never selected.
    """
    mean = np.ascontiguousarray(pool.pred_mean, dtype=float)
    sd = np.ascontiguousarray(pool.pred_sd, dtype=float)
    eff_v = kernels.eff_values(mean, sd)
    return masked_argmax(eff_v, np.asarray(esr_mask, dtype=bool))
