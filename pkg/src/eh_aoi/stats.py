"""Sample means, standard errors and the delta-method ratio estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


def estimate_ci(samples) -> tuple[float, float]:
    """(mean, standard error of the mean) with the n-1 sample deviation."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


@dataclass(frozen=True)
class RatioEstimate:
    mean_q: float
    mean_t: float
    ratio: float
    se: float
    batches: int


def _batch_sums(x: np.ndarray, batch: int) -> np.ndarray:
    nb = x.size // batch
    return x[: nb * batch].reshape(nb, batch).sum(axis=1)


def ratio_estimate(q, t, batch: Optional[int] = None) -> RatioEstimate:
    """Estimate E[Q]/E[T] and its delta-method standard error.

    With ``batch`` set, consecutive samples are summed into batches first
    so that short-range dependence between cycles does not bias the error.
    The point estimate always uses every sample.
    """
    q = np.asarray(q, dtype=float)
    t = np.asarray(t, dtype=float)
    if q.shape != t.shape or q.size < 2:
        raise ValueError("q and t must be equal-length with at least 2 samples")
    ratio = q.sum() / t.sum()
    if batch and batch > 1:
        qb, tb = _batch_sums(q, batch), _batch_sums(t, batch)
    else:
        qb, tb = q, t
    nb = qb.size
    if nb < 2:
        raise ValueError("fewer than 2 batches")
    r_b = qb.sum() / tb.sum()
    resid = qb - r_b * tb
    se = math.sqrt(resid.var(ddof=1) / nb) / tb.mean()
    return RatioEstimate(
        mean_q=float(q.mean()), mean_t=float(t.mean()), ratio=float(ratio), se=float(se), batches=nb
    )


def bootstrap_ratio_se(q, t, resamples: int, rng: np.random.Generator) -> float:
    """Nonparametric bootstrap standard error of sum(q)/sum(t)."""
    q = np.asarray(q, dtype=float)
    t = np.asarray(t, dtype=float)
    idx = rng.integers(0, q.size, size=(resamples, q.size))
    ratios = q[idx].sum(axis=1) / t[idx].sum(axis=1)
    return float(ratios.std(ddof=1))


def z_score(estimate: float, se: float, reference: float) -> float:
    if se == 0:
        return 0.0 if estimate == reference else math.copysign(math.inf, estimate - reference)
    return (estimate - reference) / se
