"""Slot-level Monte Carlo simulator of the four policies.

Conventions
-----------
* Energy that arrives in a slot can be spent in that same slot, so a
  best-effort sender gets a symbol out with probability q = p(1 - delta).
* Age is continuous and piecewise linear with unit slots. A delivery takes
  effect at the end of the slot carrying the decisive symbol, and the age
  drops to the number of slots since that update was generated.
* Areas are kept doubled in int64, so accounting is exact.

The per-slot loop is compiled with numba. Random inputs are drawn in chunks
from two independent PCG64 streams (energy, channel) derived from
``(seed, replication)``, so runs are bit-reproducible and the two battery
modes see the same arrivals and erasures.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .core import BatteryMode, ParameterError, Policy, PolicyConfig, SimStats, SystemParams

CHUNK = 1 << 20

_POLICY_CODE = {Policy.MDS_ST: 0, Policy.MDS_BE: 1, Policy.RC_BE: 2, Policy.RC_ST: 3}

# state vector slots
_BATT, _PHASE, _POS, _SUCC, _SINCE, _AGE, _CYC_AREA2, _CYC_LEN, _DONE, _NDEL, _SLOT = range(11)
_NSTATE = 11

# phases
_SAVE, _TX, _BE = 0, 1, 2


@dataclass(frozen=True)
class SlotEvent:
    slot_index: int
    energy_arrived: bool
    symbol_sent: bool
    symbol_erased: bool
    battery_after: int


@numba.njit(cache=True, nogil=True)
def _run_chunk(policy, physical, k, n, m, arrivals, erasures, state, area2,
               q2_out, t_out, a_out, log):
    battery = state[_BATT]
    phase = state[_PHASE]
    pos = state[_POS]
    succ = state[_SUCC]
    since = state[_SINCE]
    age = state[_AGE]
    cyc_area2 = state[_CYC_AREA2]
    cyc_len = state[_CYC_LEN]
    done = state[_DONE]
    ndel = state[_NDEL]
    slot = state[_SLOT]
    total2 = area2[0]
    cap = q2_out.shape[0]
    nlog = log.shape[0]

    for i in range(arrivals.shape[0]):
        arr = arrivals[i]
        erased = erasures[i]
        sent = False
        deliver = False

        if policy == 0:  # MDS save-and-transmit
            if phase == _SAVE:
                battery += arr
                pos += 1
                if pos == n:
                    pos = 0
                    if battery >= n:
                        phase = _TX
            else:
                if pos == 0:
                    since = 0
                    succ = 0
                    done = 0
                battery += arr
                battery -= 1
                sent = True
                since += 1
                if not erased and done == 0:
                    succ += 1
                    if succ == k:
                        deliver = True
                        done = 1
                pos += 1
                if pos == n:
                    pos = 0
                    if physical:
                        if battery < n:
                            phase = _SAVE
                    else:
                        battery = 0
                        phase = _SAVE

        elif policy == 1:  # MDS best-effort
            if pos == 0:
                since = 0
                succ = 0
                done = 0
            battery += arr
            if battery >= 1:
                battery -= 1
                sent = True
            since += 1
            if sent and not erased and done == 0:
                succ += 1
                if succ == k:
                    deliver = True
                    done = 1
            pos += 1
            if pos == n:
                pos = 0

        elif policy == 2:  # rateless best-effort
            battery += arr
            if battery >= 1:
                battery -= 1
                sent = True
            since += 1
            if sent and not erased:
                succ += 1
                if succ == k:
                    deliver = True
                    succ = 0

        else:  # rateless save-and-transmit
            if phase == _SAVE and pos >= m:
                since = 0
                succ = 0
                phase = _TX if battery >= 1 else _BE
            if phase == _SAVE:
                battery += arr
                pos += 1
            elif phase == _TX:
                battery += arr
                battery -= 1
                sent = True
                since += 1
                if not erased:
                    succ += 1
                if physical:
                    if succ == k:
                        deliver = True
                    elif battery == 0:
                        phase = _BE
                elif battery == 0:
                    if succ >= k:
                        deliver = True
                    else:
                        phase = _BE
            else:
                battery += arr
                if battery >= 1:
                    battery -= 1
                    sent = True
                since += 1
                if sent and not erased:
                    succ += 1
                    if succ == k:
                        deliver = True
            if deliver:
                phase = _SAVE
                pos = 0

        if slot < nlog:
            log[slot, 0] = arr
            log[slot, 1] = sent
            log[slot, 2] = erased
            log[slot, 3] = battery

        inc = 2 * age + 1
        total2 += inc
        cyc_area2 += inc
        cyc_len += 1
        age += 1
        if deliver:
            if policy == 2:
                age = since
                since = 0
            else:
                age = since
            if ndel < cap:
                q2_out[ndel] = cyc_area2
                t_out[ndel] = cyc_len
                a_out[ndel] = age
            ndel += 1
            cyc_area2 = 0
            cyc_len = 0
        slot += 1

    state[_BATT] = battery
    state[_PHASE] = phase
    state[_POS] = pos
    state[_SUCC] = succ
    state[_SINCE] = since
    state[_AGE] = age
    state[_CYC_AREA2] = cyc_area2
    state[_CYC_LEN] = cyc_len
    state[_DONE] = done
    state[_NDEL] = ndel
    state[_SLOT] = slot
    area2[0] = total2


def replication_streams(seed: int, replication: int = 0) -> tuple[np.random.Generator, np.random.Generator]:
    """(energy, channel) generators, deterministic in (seed, replication)."""
    root = np.random.SeedSequence(seed, spawn_key=(replication,))
    energy, channel = root.spawn(2)
    return np.random.Generator(np.random.PCG64(energy)), np.random.Generator(np.random.PCG64(channel))


@dataclass
class SimRun:
    stats: SimStats
    post_delivery_ages: Optional[np.ndarray]
    events: list


def _run(params: SystemParams, cfg: PolicyConfig, horizon: int, seed: int, replication: int,
         record_samples: bool, trace: int) -> SimRun:
    cfg.check(params)
    if horizon < 10 * params.k:
        raise ParameterError(f"horizon {horizon} is below 10*k = {10 * params.k}")
    if cfg.policy is Policy.RC_ST and params.p >= 1.0:
        raise ParameterError("RC_ST with p = 1 never drains its battery; use RC_BE for p=1")
    e_rng, c_rng = replication_streams(seed, replication)
    state = np.zeros(_NSTATE, dtype=np.int64)
    area2 = np.zeros(1, dtype=np.int64)
    cap = horizon // params.k + 2 if record_samples else 0
    q2 = np.zeros(cap, dtype=np.int64)
    t = np.zeros(cap, dtype=np.int64)
    a = np.zeros(cap, dtype=np.int64)
    log = np.zeros((min(trace, horizon), 4), dtype=np.int64)
    physical = cfg.battery_mode is BatteryMode.PHYSICAL
    n = cfg.n or 0
    m = cfg.m or 0
    code = _POLICY_CODE[cfg.policy]

    left = horizon
    while left:
        size = min(CHUNK, left)
        arrivals = (e_rng.random(size) < params.p).astype(np.int64)
        erasures = c_rng.random(size) < params.delta
        _run_chunk(code, physical, params.k, n, m, arrivals, erasures, state, area2, q2, t, a, log)
        left -= size

    ndel = int(state[_NDEL])
    q_samples = t_samples = ages = None
    if record_samples:
        q_samples = q2[:ndel] / 2.0
        t_samples = t[:ndel].copy()
        ages = a[:ndel].copy()
    events = [
        SlotEvent(i, bool(r[0]), bool(r[1]), bool(r[2]), int(r[3])) for i, r in enumerate(log)
    ]
    stats = SimStats(
        total_area=int(area2[0]) / 2.0,
        total_slots=horizon,
        deliveries=ndel,
        q_samples=q_samples,
        t_samples=t_samples,
    )
    return SimRun(stats=stats, post_delivery_ages=ages, events=events)


def simulate_policy(params: SystemParams, cfg: PolicyConfig, horizon: int, seed: int,
                    replication: int = 0, record_samples: bool = True) -> SimStats:
    """Run ``horizon`` slots of the policy and return age-area statistics.

    Per-cycle samples (q_i, t_i) run delivery-to-delivery; the first entry
    includes the start-up transient from time 0.
    """
    return _run(params, cfg, horizon, seed, replication, record_samples, trace=0).stats


def trace_policy(params: SystemParams, cfg: PolicyConfig, horizon: int, seed: int,
                 replication: int = 0) -> SimRun:
    """Like :func:`simulate_policy` but also returns the per-slot event log
    and the age right after each delivery."""
    return _run(params, cfg, horizon, seed, replication, record_samples=True, trace=horizon)


def simulate_replications(params: SystemParams, cfg: PolicyConfig, horizon: int, seed: int,
                          replications: int, workers: int = 1,
                          record_samples: bool = False) -> list[SimStats]:
    """Independent replications, returned in replication-index order."""
    def one(r):
        return simulate_policy(params, cfg, horizon, seed, replication=r,
                               record_samples=record_samples)

    if workers <= 1:
        return [one(r) for r in range(replications)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(replications)))


def pool_replications(runs: list[SimStats]) -> SimStats:
    """Sum replications in index order into one SimStats (no samples)."""
    return SimStats(
        total_area=float(sum(r.total_area for r in runs)),
        total_slots=int(sum(r.total_slots for r in runs)),
        deliveries=int(sum(r.deliveries for r in runs)),
    )
