"""Average age of information for coded status updates sent by an energy
harvesting transmitter over a slotted erasure channel."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    AoiBreakdown,
    BatteryMode,
    DiscretePmf,
    ParameterError,
    Policy,
    PolicyConfig,
    SimStats,
    SystemParams,
    renewal_aoi,
    validate_params,
)
from .analytic import aoi_mds_be, aoi_mds_st, aoi_rc_be, aoi_rc_st, evaluate  # noqa: E402

__all__ = [
    "AoiBreakdown",
    "BatteryMode",
    "DiscretePmf",
    "ParameterError",
    "Policy",
    "PolicyConfig",
    "SimStats",
    "SystemParams",
    "aoi_mds_be",
    "aoi_mds_st",
    "aoi_rc_be",
    "aoi_rc_st",
    "evaluate",
    "renewal_aoi",
    "validate_params",
]
