"""Domain types and the renewal-reward AoI identity.

All ages and durations are measured in slots (unit slot length).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

# normalization tolerance for every pmf in the package
PMF_NORM_TOL = 1e-9
DEFAULT_TAIL_TOL = 1e-12


class ParameterError(ValueError):
    """Raised for parameter sets outside the model's domain."""


@dataclass(frozen=True)
class SystemParams:
    """Channel and source parameters shared by every policy.

    p is the per-slot probability of a unit energy arrival, delta the
    per-slot symbol erasure probability, k the update length in symbols.
    """

    p: float
    delta: float
    k: int

    def __post_init__(self):
        p, delta, k = self.p, self.delta, self.k
        if isinstance(k, bool) or int(k) != k:
            raise ParameterError(f"k must be an integer, got {k!r}")
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "p", float(p))
        object.__setattr__(self, "delta", float(delta))
        if not math.isfinite(self.p) or not math.isfinite(self.delta):
            raise ParameterError("p and delta must be finite")
        if self.p == 0.0:
            raise ParameterError("p = 0: no energy arrivals, every AoI is infinite")
        if not 0.0 < self.p <= 1.0:
            raise ParameterError(f"p must lie in (0, 1], got {p}")
        if self.delta == 1.0:
            raise ParameterError("delta = 1: every symbol is erased, every AoI is infinite")
        if not 0.0 <= self.delta < 1.0:
            raise ParameterError(f"delta must lie in [0, 1), got {delta}")
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {k}")

    @property
    def q(self) -> float:
        """Per-slot symbol success probability under best-effort transmission."""
        return self.p * (1.0 - self.delta)


def validate_params(raw: Union[SystemParams, Mapping[str, object]]) -> SystemParams:
    """Build a SystemParams from a mapping (or pass a validated one through)."""
    if isinstance(raw, SystemParams):
        return raw
    try:
        return SystemParams(p=raw["p"], delta=raw["delta"], k=raw["k"])
    except KeyError as exc:
        raise ParameterError(f"missing parameter {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(str(exc)) from None


@dataclass(frozen=True)
class DiscretePmf:
    """Finite-support pmf on {offset, offset+stride, ...}.

    ``tail_mass`` is the probability that was truncated beyond the stored
    support; moments are computed over the stored support only.
    """

    offset: int
    masses: np.ndarray
    tail_mass: float = 0.0
    stride: int = 1

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float)
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)
        if masses.ndim != 1 or masses.size == 0:
            raise ValueError("masses must be a non-empty 1-d array")
        if np.any(masses < 0) or self.tail_mass < 0:
            raise ValueError("negative probability mass")
        total = float(masses.sum()) + self.tail_mass
        if abs(total - 1.0) > PMF_NORM_TOL:
            raise ValueError(f"pmf not normalized: total mass {total!r}")

    @property
    def support(self) -> np.ndarray:
        return self.offset + self.stride * np.arange(self.masses.size)

    def moment(self, order: int) -> float:
        return float(np.dot(self.masses, self.support.astype(float) ** order))

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def second_moment(self) -> float:
        return self.moment(2)

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2

    def prob(self, x: int) -> float:
        i, r = divmod(x - self.offset, self.stride)
        if r or i < 0 or i >= self.masses.size:
            return 0.0
        return float(self.masses[i])


@dataclass(frozen=True)
class AoiBreakdown:
    mean_q: float
    mean_t: float
    aoi: float


def renewal_aoi(mean_q: float, mean_t: float) -> AoiBreakdown:
    """Average age E[Q]/E[T] for a renewal process with i.i.d. (Q, T) cycles."""
    if not mean_t > 0 or not mean_q > 0:
        raise ValueError(f"renewal moments must be positive, got E[Q]={mean_q}, E[T]={mean_t}")
    return AoiBreakdown(mean_q=float(mean_q), mean_t=float(mean_t), aoi=mean_q / mean_t)


@dataclass
class SimStats:
    total_area: float
    total_slots: int
    deliveries: int
    q_samples: Optional[np.ndarray] = field(default=None, repr=False)
    t_samples: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def empirical_aoi(self) -> float:
        return self.total_area / self.total_slots


class Policy(str, enum.Enum):
    MDS_ST = "MDS_ST"
    MDS_BE = "MDS_BE"
    RC_BE = "RC_BE"
    RC_ST = "RC_ST"

    def __str__(self):
        return self.value


class BatteryMode(str, enum.Enum):
    ANALYSIS_FAITHFUL = "analysis_faithful"
    PHYSICAL = "physical"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PolicyConfig:
    """Policy plus its free parameter: n for MDS policies, m for RC_ST.

    battery_mode only changes the slot simulator for the save-and-transmit
    policies; analytic results ignore it.
    """

    policy: Policy
    n: Optional[int] = None
    m: Optional[int] = None
    battery_mode: BatteryMode = BatteryMode.ANALYSIS_FAITHFUL

    def __post_init__(self):
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "battery_mode", BatteryMode(self.battery_mode))
        pol = self.policy
        if pol in (Policy.MDS_ST, Policy.MDS_BE):
            if self.n is None or self.n < 1:
                raise ParameterError(f"{pol} requires a positive blocklength n")
            if self.m is not None:
                raise ParameterError(f"{pol} takes no saving duration m")
        elif pol is Policy.RC_ST:
            if self.m is None or self.m < 0:
                raise ParameterError("RC_ST requires a non-negative saving duration m")
            if self.n is not None:
                raise ParameterError("RC_ST takes no blocklength n")
        else:
            if self.n is not None or self.m is not None:
                raise ParameterError("RC_BE has no free parameter")

    def check(self, params: SystemParams) -> None:
        if self.n is not None and self.n < params.k:
            raise ParameterError(f"blocklength n={self.n} is below k={params.k}")

    @property
    def free_param(self) -> Optional[int]:
        return self.n if self.n is not None else self.m


def parse_policies(names: Sequence[str]) -> list[Policy]:
    out = []
    for name in names:
        try:
            out.append(Policy(name.strip().upper()))
        except ValueError:
            raise ParameterError(f"unknown policy {name!r}") from None
    return out
