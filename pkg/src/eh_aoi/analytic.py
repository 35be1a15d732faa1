"""Closed-form average AoI for the four coding/energy policies.

MDS save-and-transmit and rateless save-and-transmit are renewal-reward
ratios assembled from the kernels in :mod:`eh_aoi.dist`; the two best-effort
policies have scalar closed forms in q = p(1 - delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .core import (
    DEFAULT_TAIL_TOL,
    AoiBreakdown,
    DiscretePmf,
    ParameterError,
    Policy,
    PolicyConfig,
    SystemParams,
    renewal_aoi,
)
from .dist import binomial_pmf, decode_slot_pmf, negbin_pmf, save_duration_pmf, success_prob_eps

INFINITE = AoiBreakdown(mean_q=math.inf, mean_t=math.inf, aoi=math.inf)


# --------------------------------------------------------------------------
# MDS coding
# --------------------------------------------------------------------------

def aoi_mds_st(params: SystemParams, n: int, tail_tol: float = DEFAULT_TAIL_TOL) -> AoiBreakdown:
    """MDS (n, k) code, save-and-transmit, battery depleted after each round.

    Saving lasts ceil(W/n)*n slots; a round of n slots then succeeds with
    probability eps = P(>= k of n symbols survive erasures).
    """
    k = params.k
    if n < k:
        raise ParameterError(f"blocklength n={n} is below k={k}")
    s = 1.0 - params.delta
    eps = success_prob_eps(k, n, s)
    if eps == 0.0:
        return INFINITE
    zpmf = save_duration_pmf(n, params.p, tail_tol)
    ez, ez2 = zpmf.mean, zpmf.second_moment
    mu_x = decode_slot_pmf(k, n, s).mean

    mean_t = n / eps + ez / eps
    mean_q = (
        n**2 * (2 - eps) / (2 * eps**2)
        + n * mu_x / eps
        + n * (2 - eps) * ez / eps**2
        + mu_x * ez / eps
        + 0.5 * ez2 / eps
        + (1 - eps) * ez**2 / eps**2
    )
    return renewal_aoi(mean_q, mean_t)


def aoi_mds_be(params: SystemParams, n: int) -> AoiBreakdown:
    """MDS (n, k) code sent best-effort; each symbol survives with prob q.

    A fresh update starts every n slots, so the renewal length is n times a
    Geometric(eps_{k,n}(q)) count of rounds.
    """
    k, q = params.k, params.q
    if n < k:
        raise ParameterError(f"blocklength n={n} is below k={k}")
    e_kn = success_prob_eps(k, n, q)
    if e_kn == 0.0:
        return INFINITE
    e_next = success_prob_eps(k + 1, n + 1, q)
    aoi = n / e_kn - n / 2 + k * e_next / (q * e_kn)
    mean_t = n / e_kn
    return AoiBreakdown(mean_q=aoi * mean_t, mean_t=mean_t, aoi=aoi)


# --------------------------------------------------------------------------
# Rateless coding
# --------------------------------------------------------------------------

def aoi_rc_be(params: SystemParams) -> AoiBreakdown:
    """Rateless code sent best-effort: (k/q)(3/2 + (1-q)/k)."""
    k, q = params.k, params.q
    aoi = (k / q) * (1.5 + (1.0 - q) / k)
    mean_t = k / q
    return AoiBreakdown(mean_q=aoi * mean_t, mean_t=mean_t, aoi=aoi)


def _check_harvest_args(m: int, p: float, tail_tol: float) -> None:
    if m < 0:
        raise ParameterError(f"saving duration m must be >= 0, got {m}")
    if p >= 1.0:
        raise ParameterError(
            "p = 1: the no-outage phase never terminates; use RC_BE for p=1"
        )
    if not p > 0.0:
        raise ParameterError("p must be positive")
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")


def total_harvest_pmf(m: int, p: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DiscretePmf:
    """Law of Y = E_1 + E_2 + ..., E_1 ~ Bin(m, p), E_i | E_{i-1} ~ Bin(E_{i-1}, p).

    Generation-by-generation dynamic program over (current generation size,
    accumulated total). Paths die when a generation is empty. Mass pruned
    from negligible states plus mass still alive when the loop stops is
    reported as ``tail_mass`` (< tail_tol).
    """
    _check_harvest_args(m, p, tail_tol)
    if m == 0:
        return DiscretePmf(offset=0, masses=np.array([1.0]))

    gens = max(1, math.ceil(math.log(tail_tol / (4 * m)) / math.log(p)) + 1)
    budget = tail_tol / 2

    # state[e, y]: probability of current generation e with accumulated total y
    e1 = np.arange(m + 1)
    first = binomial_pmf(m, p, e1)
    state = np.zeros((m + 1, m + 1))
    state[e1, e1] = first
    done = np.zeros(1)
    pruned = 0.0
    trans_cache: dict[int, np.ndarray] = {}

    while True:
        absorbed = state[0]
        if done.size < absorbed.size:
            done = np.pad(done, (0, absorbed.size - done.size))
        done[: absorbed.size] += absorbed
        live = state[1:]
        # drop empty high-e rows
        nz_rows = np.flatnonzero(live.any(axis=1))
        live_mass = float(live.sum())
        if nz_rows.size == 0 or live_mass < tail_tol / 2:
            pruned += live_mass
            break
        e_max = int(nz_rows[-1]) + 1
        live = live[:e_max]
        width = live.shape[1]

        trans = trans_cache.get(e_max)
        if trans is None:
            ee = np.arange(1, e_max + 1)[:, None]
            ff = np.arange(0, e_max + 1)[None, :]
            trans = np.where(ff <= ee, binomial_pmf(np.broadcast_to(ee, (e_max, e_max + 1)),
                                                    p, np.minimum(ff, ee)), 0.0)
            trans_cache[e_max] = trans
        # mixed[f, y] = sum_e P(E_next = f | e) * live[e, y]
        mixed = trans.T @ live
        nxt = np.zeros((e_max + 1, width + e_max))
        for f in range(e_max + 1):
            nxt[f, f : f + width] = mixed[f]

        thresh = budget / (nxt.size * gens)
        small = (nxt < thresh) & (nxt > 0)
        pruned += float(nxt[small].sum())
        nxt[small] = 0.0
        state = nxt

    last = np.flatnonzero(done > 0)
    masses = done[: last[-1] + 1] if last.size else np.array([0.0])
    total = float(masses.sum())
    tail = max(0.0, 1.0 - total)
    return DiscretePmf(offset=0, masses=masses, tail_mass=tail)


def total_harvest_pmf_closed_form(m: int, p: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DiscretePmf:
    """Same law as :func:`total_harvest_pmf`, via Y ~ NegBin failures.

    Y counts the arrivals seen before the m-th empty slot across the saving
    and no-outage phases together, so P(Y=y) = C(y+m-1, y) (1-p)^m p^y.
    """
    _check_harvest_args(m, p, tail_tol)
    if m == 0:
        return DiscretePmf(offset=0, masses=np.array([1.0]))
    y_max = int(stats.nbinom.isf(tail_tol, m, 1.0 - p)) + 1
    y = np.arange(y_max + 1)
    masses = negbin_pmf(m, 1.0 - p, y + m)
    tail = float(stats.nbinom.sf(y_max, m, 1.0 - p))
    return DiscretePmf(offset=0, masses=masses, tail_mass=tail)


@dataclass(frozen=True)
class HarvestMoments:
    mean: float
    variance: float
    second_moment: float


def harvest_moments(m: int, p: float) -> HarvestMoments:
    """Mean mp/(1-p) and variance mp(1+p)/((1-p)(1-p^2)) of the no-outage length."""
    if p >= 1.0:
        raise ParameterError("p = 1: the no-outage phase never terminates")
    if m < 0 or p <= 0.0:
        raise ParameterError("need m >= 0 and p > 0")
    mean = m * p / (1 - p)
    var = m * p * (1 + p) / ((1 - p) * (1 - p**2))
    return HarvestMoments(mean=mean, variance=var, second_moment=var + mean**2)


@dataclass(frozen=True)
class RcStConditionalMoments:
    z_mean_given_y: float
    z_second_given_y: float
    yz_mean_given_y: float


def residual_kernel(k: int, w):
    """Symbols still missing after w successes: max(k - w, 0)."""
    return np.maximum(k - np.asarray(w), 0)


def conditional_z_tables(params: SystemParams, y_max: int) -> tuple[np.ndarray, np.ndarray]:
    """E[Z | Y=y] and E[Z^2 | Y=y] for y = 0..y_max.

    W | Y=y ~ Bin(y, 1-delta) symbols get through in the no-outage phase; the
    remaining max(k-W, 0) need NegBin trials at success q.
    """
    k, q, s = params.k, params.q, 1.0 - params.delta
    y = np.arange(y_max + 1)[:, None]
    w = np.arange(k)[None, :]
    yy, ww = np.broadcast_arrays(y, w)
    inside = ww <= yy
    pw = np.zeros(yy.shape)
    pw[inside] = binomial_pmf(yy[inside], s, ww[inside])
    g = residual_kernel(k, w).astype(float)
    z_mean = pw @ g[0] / q
    z_second = pw @ (g[0] * (g[0] + 1.0 - q)) / q**2
    return z_mean, z_second


def rc_st_conditional_moments(params: SystemParams, y: int) -> RcStConditionalMoments:
    if y < 0:
        raise ValueError("y must be >= 0")
    zm, zs = conditional_z_tables(params, y)
    return RcStConditionalMoments(
        z_mean_given_y=float(zm[y]),
        z_second_given_y=float(zs[y]),
        yz_mean_given_y=float(y * zm[y]),
    )


def aoi_rc_st(
    params: SystemParams,
    m: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
    y_method: str = "closed_form",
    z_tables: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> AoiBreakdown:
    """Rateless code, save m slots after each delivery, then send until the
    battery drains and finish best-effort.

    The previous cycle's (Y', Z') is independent of the current one, so the
    cross term factors into 2 (m + E[Y+Z]) E[Y+Z].

    ``y_method`` selects the Y law: "closed_form" (negative binomial) or
    "dp" (thinning-chain dynamic program). ``z_tables`` lets a caller reuse
    :func:`conditional_z_tables` across many m.
    """
    if y_method == "closed_form":
        ypmf = total_harvest_pmf_closed_form(m, params.p, tail_tol)
    elif y_method == "dp":
        ypmf = total_harvest_pmf(m, params.p, tail_tol)
    else:
        raise ValueError(f"unknown y_method {y_method!r}")
    y = ypmf.support
    y_max = int(y[-1])
    if z_tables is None or z_tables[0].size <= y_max:
        z_tables = conditional_z_tables(params, y_max)
    zm = z_tables[0][: y_max + 1]
    zs = z_tables[1][: y_max + 1]
    P = ypmf.masses
    yf = y.astype(float)

    ey = float(P @ yf)
    ey2 = float(P @ yf**2)
    ez = float(P @ zm)
    ez2 = float(P @ zs)
    eyz = float(P @ (yf * zm))

    s = ey + ez
    mean_t = m + s
    second = m**2 + 2 * m * s + ey2 + 2 * eyz + ez2
    mean_q = 0.5 * (second + 2 * (m + s) * s)
    return renewal_aoi(mean_q, mean_t)


def rc_st_zero_saving_value(params: SystemParams) -> float:
    """RC_ST at m = 0: (3k + 1 - q) / (2q)."""
    k, q = params.k, params.q
    return (3 * k + 1 - q) / (2 * q)


def rc_gap(params: SystemParams) -> float:
    """RC_BE closed form minus RC_ST at m = 0; equals (1 - q) / (2q)."""
    return aoi_rc_be(params).aoi - rc_st_zero_saving_value(params)


def rc_gap_warning(params: SystemParams) -> str:
    q = params.q
    return (
        f"RC_ST at m=0 gives (3k+1-q)/(2q) = {rc_st_zero_saving_value(params):.12g} while the "
        f"RC_BE closed form gives {aoi_rc_be(params).aoi:.12g}; the constant gap (1-q)/(2q) = "
        f"{(1 - q) / (2 * q):.12g} comes from differing age-accounting conventions and is "
        "reported, not reconciled"
    )


def evaluate(params: SystemParams, cfg: PolicyConfig, tail_tol: float = DEFAULT_TAIL_TOL) -> AoiBreakdown:
    """Dispatch to the closed form matching ``cfg.policy``."""
    cfg.check(params)
    if cfg.policy is Policy.MDS_ST:
        return aoi_mds_st(params, cfg.n, tail_tol)
    if cfg.policy is Policy.MDS_BE:
        return aoi_mds_be(params, cfg.n)
    if cfg.policy is Policy.RC_BE:
        return aoi_rc_be(params)
    return aoi_rc_st(params, cfg.m, tail_tol)
