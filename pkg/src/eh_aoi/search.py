"""Exhaustive optimization of the free policy parameter and grid sweeps."""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from scipy import stats

from .analytic import aoi_mds_be, aoi_mds_st, aoi_rc_be, aoi_rc_st, conditional_z_tables
from .core import DEFAULT_TAIL_TOL, AoiBreakdown, ParameterError, Policy, SystemParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Optimum:
    free_param: int
    aoi: float
    breakdown: AoiBreakdown
    at_boundary: bool


@dataclass(frozen=True)
class SweepRow:
    params: SystemParams
    policy: Policy
    free_param: Optional[int]
    aoi: float
    mean_q: float
    mean_t: float
    at_boundary: bool = False


def default_n_max(params: SystemParams) -> int:
    return 10 * params.k + 50


def default_m_max(params: SystemParams) -> int:
    return math.ceil(10 * params.k * (1 - params.p) / params.p) + 50


def _argmin(values: Iterable[tuple[int, AoiBreakdown]], upper: int, lower: int) -> Optimum:
    best = None
    for x, br in values:
        if best is None or br.aoi < best[1].aoi:
            best = (x, br)
    x, br = best
    # a minimizer on the lower edge is natural (e.g. n = k); only the upper edge means the range was too small
    at_boundary = x == upper and upper > lower
    return Optimum(free_param=x, aoi=br.aoi, breakdown=br, at_boundary=at_boundary)


def best_n(params: SystemParams, policy: Policy, n_max: Optional[int] = None,
           tail_tol: float = DEFAULT_TAIL_TOL) -> Optimum:
    """Scan n = k..n_max; ties go to the smaller n."""
    policy = Policy(policy)
    if n_max is None:
        n_max = default_n_max(params)
    if n_max < params.k:
        raise ParameterError(f"n_max={n_max} is below k={params.k}")
    if policy is Policy.MDS_ST:
        def f(n):
            return aoi_mds_st(params, n, tail_tol)
    elif policy is Policy.MDS_BE:
        def f(n):
            return aoi_mds_be(params, n)
    else:
        raise ParameterError(f"best_n applies to MDS policies, not {policy}")
    opt = _argmin(((n, f(n)) for n in range(params.k, n_max + 1)), n_max, params.k)
    if opt.at_boundary:
        log.warning("best_n for %s hit the search bound n_max=%d", policy, n_max)
    return opt


def best_m(params: SystemParams, m_max: Optional[int] = None,
           tail_tol: float = DEFAULT_TAIL_TOL) -> Optimum:
    """Scan m = 0..m_max of the RC_ST AoI; ties go to the smaller m."""
    if m_max is None:
        m_max = default_m_max(params)
    if m_max < 0:
        raise ParameterError(f"m_max must be >= 0, got {m_max}")
    if params.p >= 1.0:
        raise ParameterError("RC_ST is undefined for p = 1; use RC_BE for p=1")
    y_top = int(stats.nbinom.isf(tail_tol, max(m_max, 1), 1.0 - params.p)) + 2
    tables = conditional_z_tables(params, y_top)
    opt = _argmin(
        ((m, aoi_rc_st(params, m, tail_tol, z_tables=tables)) for m in range(m_max + 1)),
        m_max, 0,
    )
    if opt.at_boundary:
        log.warning("best_m hit the search bound m_max=%d", m_max)
    return opt


def optimize(params: SystemParams, policy: Policy, bound: Optional[int] = None,
             tail_tol: float = DEFAULT_TAIL_TOL) -> SweepRow:
    """Optimized row for one policy; RC_BE has no free parameter."""
    policy = Policy(policy)
    if policy is Policy.RC_BE:
        br = aoi_rc_be(params)
        return SweepRow(params, policy, None, br.aoi, br.mean_q, br.mean_t)
    if policy is Policy.RC_ST:
        opt = best_m(params, bound, tail_tol)
    else:
        opt = best_n(params, policy, bound, tail_tol)
    br = opt.breakdown
    return SweepRow(params, policy, opt.free_param, br.aoi, br.mean_q, br.mean_t, opt.at_boundary)


def _task(args):
    params, policy, tail_tol = args
    return optimize(params, policy, tail_tol=tail_tol)


def sweep(p_values: Sequence[float], delta_values: Sequence[float], k_values: Sequence[int],
          policies: Sequence[Policy], tail_tol: float = DEFAULT_TAIL_TOL, workers: int = 1,
          notes: Optional[list] = None) -> list[SweepRow]:
    """Optimize every policy at every grid point.

    Rows are ordered by (p, delta, k, policy name). RC_ST is skipped at
    p = 1, where its no-outage phase never ends; the skip is recorded in
    ``notes`` when given.
    """
    if not p_values or not delta_values or not k_values or not policies:
        raise ParameterError("empty sweep grid")
    pols = sorted({Policy(x) for x in policies}, key=lambda x: x.value)
    tasks = []
    for p, d, k in itertools.product(sorted(set(p_values)), sorted(set(delta_values)), sorted(set(k_values))):
        params = SystemParams(p=p, delta=d, k=k)
        for pol in pols:
            if pol is Policy.RC_ST and params.p >= 1.0:
                msg = f"RC_ST skipped at p={params.p}: use RC_BE for p=1"
                if notes is None:
                    log.warning(msg)
                else:
                    notes.append(msg)
                continue
            tasks.append((params, pol, tail_tol))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_task, tasks))
    else:
        rows = [_task(t) for t in tasks]
    for r in rows:
        if r.at_boundary and notes is not None:
            notes.append(f"{r.policy} at p={r.params.p}, delta={r.params.delta}, k={r.params.k}: "
                         f"optimum {r.free_param} sits on the search bound")
    return rows


def mds_st_monotonicity_violations(rows: Sequence[SweepRow], rtol: float = 1e-9) -> list[str]:
    """Optimized MDS_ST AoI should not increase with p at fixed (delta, k)."""
    groups: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        if r.policy is Policy.MDS_ST:
            groups.setdefault((r.params.delta, r.params.k), []).append(r)
    bad = []
    for (d, k), rs in groups.items():
        rs = sorted(rs, key=lambda r: r.params.p)
        for lo, hi in zip(rs, rs[1:]):
            if hi.aoi > lo.aoi * (1 + rtol):
                bad.append(f"MDS_ST delta={d} k={k}: AoI rises from {lo.aoi:.6g} at p={lo.params.p} "
                           f"to {hi.aoi:.6g} at p={hi.params.p}")
    return bad
