"""Link-level simulation and error-probability analysis for three-user noise-domain NOMA."""

from .params import ConfigError, DerivedPowers, SystemParams, derive, derive_downlink, derive_uplink

__all__ = [
    "ConfigError",
    "DerivedPowers",
    "SystemParams",
    "derive",
    "derive_downlink",
    "derive_uplink",
]
__version__ = "0.1.0"
