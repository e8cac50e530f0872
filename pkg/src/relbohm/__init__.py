"""Relativistic Bohmian velocity fields and single-photon trajectories.

Evaluates the weak-value velocity field V = j/rho of counter-propagating
Gaussian photon wavepackets in three dispersion regimes, integrates
deterministic trajectory ensembles, applies Lorentz boosts, and verifies
continuity, covariance, Born-density matching and the null-metric identity.
"""

from .core import (
    BoostFrame,
    FieldSample,
    GridSpec,
    Regime,
    RunConfig,
    SpacetimePoint,
    Undefined,
    ValidationReport,
    WavepacketSpec,
    is_defined,
    parse_config,
    serialize_config,
    validate_spec,
)

__version__ = "0.1.0"

__all__ = [
    "BoostFrame",
    "FieldSample",
    "GridSpec",
    "Regime",
    "RunConfig",
    "SpacetimePoint",
    "Undefined",
    "ValidationReport",
    "WavepacketSpec",
    "is_defined",
    "parse_config",
    "serialize_config",
    "validate_spec",
    "__version__",
]
