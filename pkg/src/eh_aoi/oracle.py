"""Renewal-reward samplers for the two save-and-transmit policies.

These draw the cycle ingredients straight from their generative
definitions (arrival counts, erasure counts, binomial thinning chains)
and average the per-cycle age area, so they check the expectation algebra
of the analytic module without sharing any of its code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .core import ParameterError, SystemParams
from .stats import RatioEstimate, estimate_ci, ratio_estimate


@dataclass(frozen=True)
class OracleResult:
    mean_q: float
    mean_t: float
    aoi: float
    aoi_se: float
    mean_t_se: float
    mean_q_se: float
    renewals: int

    @classmethod
    def from_samples(cls, q, t, batch=None):
        est: RatioEstimate = ratio_estimate(q, t, batch=batch)
        _, t_se = estimate_ci(t)
        _, q_se = estimate_ci(q)
        return cls(
            mean_q=est.mean_q, mean_t=est.mean_t, aoi=est.ratio, aoi_se=est.se,
            mean_t_se=t_se, mean_q_se=q_se, renewals=len(t),
        )


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


# --------------------------------------------------------------------------
# MDS save-and-transmit
# --------------------------------------------------------------------------

def q_area_direct(n, v, x, s):
    """Twice the cycle area, written as initial age n over the run to delivery
    plus the leftover triangle of the final round."""
    run = n * (v - 1) + x + s
    return 2 * n * run + run * run + n * n - x * x


def q_area_expanded(n, v, x, s):
    """Twice the cycle area, expanded into the terms used for expectations."""
    return n * n * v * v + 2 * n * v * x + 2 * n * s + 2 * (n * (v - 1) + x) * s + s * s


def sample_mds_st_cycles(params: SystemParams, n: int, renewals: int, rng: np.random.Generator):
    """Draw (V, X~, S) for ``renewals`` cycles.

    V is the number of n-slot rounds until one carries k unerased symbols,
    X~ the slot of the k-th success within that round, S the total saving
    time summed over the V saving phases.
    """
    k, delta, p = params.k, params.delta, params.p
    eps = float(sps.binom.sf(k - 1, n, 1.0 - delta))
    if eps <= 0.0:
        raise ParameterError("round success probability underflows to 0")
    v = rng.geometric(eps, size=renewals).astype(np.int64)

    # k-th success slot, conditioned to land inside the round
    x = np.empty(renewals, dtype=np.int64)
    todo = np.arange(renewals)
    while todo.size:
        draw = k + rng.negative_binomial(k, 1.0 - delta, size=todo.size)
        ok = draw <= n
        x[todo[ok]] = draw[ok]
        todo = todo[~ok]

    total = int(v.sum())
    w = n + rng.negative_binomial(n, p, size=total)
    z = -(-w // n) * n
    starts = np.concatenate(([0], np.cumsum(v)[:-1]))
    s = np.add.reduceat(z, starts).astype(np.int64)
    return v, x, s


def renewal_oracle_mds_st(params: SystemParams, n: int, renewals: int, seed: int) -> OracleResult:
    if renewals < 2:
        raise ValueError("need at least 2 renewals")
    if n < params.k:
        raise ParameterError(f"blocklength n={n} is below k={params.k}")
    v, x, s = sample_mds_st_cycles(params, n, renewals, _rng(seed))
    q2 = q_area_direct(n, v, x, s)
    if not np.array_equal(q2, q_area_expanded(n, v, x, s)):
        raise AssertionError("cycle area forms disagree")
    t = n * v + s
    return OracleResult.from_samples(q2 / 2.0, t)


# --------------------------------------------------------------------------
# Rateless save-and-transmit
# --------------------------------------------------------------------------

def sample_total_harvest(m: int, p: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Y = E_1 + E_2 + ... with E_1 ~ Bin(m, p), E_i ~ Bin(E_{i-1}, p)."""
    if p >= 1.0:
        raise ParameterError("p = 1: the thinning chain never dies out")
    e = rng.binomial(m, p, size=size)
    y = e.astype(np.int64)
    while e.any():
        e = rng.binomial(e, p)
        y += e
    return y


def sample_rc_st_durations(params: SystemParams, m: int, size: int, rng: np.random.Generator):
    """(Y, Z) per cycle: no-outage length and best-effort remainder."""
    k, q = params.k, params.q
    y = sample_total_harvest(m, params.p, size, rng)
    w = rng.binomial(y, 1.0 - params.delta)
    r = np.maximum(k - w, 0)
    z = np.zeros(size, dtype=np.int64)
    need = r > 0
    z[need] = r[need] + rng.negative_binomial(r[need], q)
    return y, z


def renewal_oracle_rc_st(params: SystemParams, m: int, renewals: int, seed: int,
                         batch: int = 1000) -> OracleResult:
    """Average of (m+Y+Z)^2/2 + (m+Y+Z)(Y'+Z') over cycles, (Y', Z') from
    the previous cycle. Consecutive terms share a cycle, hence batching."""
    if renewals < 2:
        raise ValueError("need at least 2 renewals")
    if m < 0:
        raise ParameterError("m must be >= 0")
    y, z = sample_rc_st_durations(params, m, renewals + 1, _rng(seed))
    d = (y + z).astype(float)
    cur, prev = d[1:], d[:-1]
    t = m + cur
    q = 0.5 * t * t + t * prev
    return OracleResult.from_samples(q, t, batch=batch if renewals >= 2 * batch else None)
