"""Probability kernels: binomial / negative binomial pmfs, block decoding
probabilities, the quantized saving-duration law and random-sum moments.

Combinatorial factors go through log-gamma so k, n in the thousands stay
finite. Every pmf function broadcasts over array arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .core import DEFAULT_TAIL_TOL, DiscretePmf


def _log_binom_coef(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return special.gammaln(a + 1) - special.gammaln(b + 1) - special.gammaln(a - b + 1)


def binomial_pmf(trials, s, x):
    """C(trials, x) s^x (1-s)^(trials-x)."""
    trials_a = np.asarray(trials)
    x_a = np.asarray(x)
    if np.any(x_a > trials_a) or np.any(x_a < 0):
        raise ValueError("binomial_pmf needs 0 <= x <= trials")
    logp = (
        _log_binom_coef(trials_a, x_a)
        + special.xlogy(x_a, s)
        + special.xlog1py(trials_a - x_a, -np.asarray(s, dtype=float))
    )
    out = np.exp(logp)
    return float(out) if out.ndim == 0 else out


def negbin_pmf(r, s, w):
    """P(W = w) where W is the trial index of the r-th success.

    Returns 0 for w < r.
    """
    r_a = np.asarray(r)
    w_a = np.asarray(w)
    if np.any(r_a < 1):
        raise ValueError("negbin_pmf needs r >= 1")
    valid = w_a >= r_a
    w_safe = np.where(valid, w_a, r_a)
    logp = (
        _log_binom_coef(w_safe - 1, r_a - 1)
        + special.xlogy(r_a, s)
        + special.xlog1py(w_safe - r_a, -np.asarray(s, dtype=float))
    )
    out = np.where(valid, np.exp(logp), 0.0)
    return float(out) if out.ndim == 0 else out


def success_prob_eps(k: int, n: int, s: float) -> float:
    """Probability that at least k of n symbols get through, each with success s.

    Summed as the k-th success landing in slot x <= n.
    """
    if n < k:
        raise ValueError(f"success_prob_eps needs n >= k, got n={n}, k={k}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if s <= 0.0:
        return 0.0
    if s >= 1.0:
        return 1.0
    x = np.arange(k, n + 1)
    return float(min(1.0, np.sum(negbin_pmf(k, s, x))))


def save_duration_pmf(n: int, p: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DiscretePmf:
    """Law of Z = ceil(W/n)*n, W ~ NegBin(n, p) the slot of the n-th arrival.

    Support {n, 2n, ...} is cut once the remaining tail is below tail_tol.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if n < 1 or tail_tol <= 0:
        raise ValueError("need n >= 1 and tail_tol > 0")
    if p == 1.0:
        return DiscretePmf(offset=n, masses=np.array([1.0]), stride=n)

    # P(W > jn) = P(Bin(jn, p) < n)
    mean_w = n / p
    sd_w = math.sqrt(n * (1 - p)) / p
    blocks = max(2, math.ceil((mean_w + 12 * sd_w + 30 / p) / n))
    while True:
        j = np.arange(1, blocks + 1)
        tails = stats.binom.cdf(n - 1, j * n, p)
        hit = np.flatnonzero(tails < tail_tol)
        if hit.size:
            blocks = int(hit[0]) + 1
            tail = float(tails[blocks - 1])
            break
        blocks *= 2

    w = np.arange(1, blocks * n + 1)
    pw = negbin_pmf(n, p, w)
    masses = pw.reshape(blocks, n).sum(axis=1)
    return DiscretePmf(offset=n, masses=masses, tail_mass=tail, stride=n)


def decode_slot_pmf(k: int, n: int, s: float) -> DiscretePmf:
    """Slot of the k-th success given it falls within the first n slots."""
    if n < k or k < 1:
        raise ValueError(f"need n >= k >= 1, got k={k}, n={n}")
    eps = success_prob_eps(k, n, s)
    if eps == 0.0:
        raise ValueError("decoding impossible: per-symbol success probability is 0")
    if s >= 1.0:
        masses = np.zeros(n - k + 1)
        masses[0] = 1.0
        return DiscretePmf(offset=k, masses=masses)
    masses = negbin_pmf(k, s, np.arange(k, n + 1)) / eps
    # absorb rounding so the normalization invariant is exact to float precision
    masses = masses / masses.sum()
    return DiscretePmf(offset=k, masses=masses)


@dataclass(frozen=True)
class RandomSumMoments:
    mean: float
    second_moment: float


def random_sum_moments(z_mean: float, z_second: float, eps: float) -> RandomSumMoments:
    """First two moments of sum_{j=1}^V Z_j, V ~ Geometric(eps) on {1, 2, ...}
    independent of the i.i.d. Z_j."""
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if z_second < z_mean**2 * (1 - 1e-12):
        raise ValueError("z_second must be >= z_mean**2")
    mean = z_mean / eps
    second = z_second / eps + (2.0 - 2.0 * eps) / eps**2 * z_mean**2
    return RandomSumMoments(mean=mean, second_moment=second)
