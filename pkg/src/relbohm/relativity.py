"""Lorentz transformations of points, velocities, currents and envelope
parameters, and the construction of the frame with non-negative density.

Envelope boosting applies the light-like Doppler factors
D- = sqrt((1-v)/(1+v)) to the right-mover and D+ = 1/D- to the left-mover,
which is exact for the head-on dispersion E = |k| (a boosted Gaussian stays
Gaussian only there), so these operations require kz = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BoostFrame, Regime, SpacetimePoint, Undefined, WavepacketSpec

__all__ = [
    "NonOpticalSpec",
    "BoostedSpec",
    "doppler_factors",
    "boost_point",
    "boost_point_arrays",
    "add_velocity",
    "add_velocity_array",
    "boost_current",
    "boost_spec",
    "positivity_frame",
    "compose_boosts",
]


class NonOpticalSpec(ValueError):
    """Operation requires the optics approximation to hold."""


@dataclass(frozen=True)
class BoostedSpec:
    """Wavepacket parameters as seen from a boosted frame."""

    spec: WavepacketSpec
    frame: BoostFrame


def doppler_factors(v: float) -> tuple[float, float]:
    """(D-, D+) scaling right- and left-moving wavenumbers under a boost v."""
    d_minus = math.sqrt((1.0 - v) / (1.0 + v))
    return d_minus, 1.0 / d_minus


def boost_point(p: SpacetimePoint, frame: BoostFrame) -> SpacetimePoint:
    """t' = gamma (t - v x), x' = gamma (x - v t)."""
    g, v = frame.gamma, frame.v
    return SpacetimePoint(t=g * (p.t - v * p.x), x=g * (p.x - v * p.t))


def boost_point_arrays(t, x, frame: BoostFrame):
    g, v = frame.gamma, frame.v
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return g * (t - v * x), g * (x - v * t)


def add_velocity(V, frame: BoostFrame):
    """Relativistic velocity addition (V - v)/(1 - v V).

    Undefined inputs propagate.  At the pole 1 - v V = 0 the result is
    Undefined with the sign of the one-sided limit approached from below
    (V slightly less than 1/v), which is sign(V - v).
    """
    if isinstance(V, Undefined):
        return V
    v = frame.v
    denom = 1.0 - v * V
    if denom == 0.0:
        return Undefined(sign=math.copysign(1.0, V - v))
    return (V - v) / denom


def add_velocity_array(V, frame: BoostFrame) -> np.ndarray:
    """Vectorised velocity addition; nan propagates and marks poles."""
    V = np.asarray(V, dtype=float)
    denom = 1.0 - frame.v * V
    out = np.full(V.shape, np.nan)
    np.divide(V - frame.v, denom, out=out, where=denom != 0.0)
    return out


def boost_current(j, rho, frame: BoostFrame):
    """Two-vector transformation j' = gamma (j - v rho), rho' = gamma (rho - v j)."""
    g, v = frame.gamma, frame.v
    return g * (j - v * rho), g * (rho - v * j)


def boost_spec(spec: WavepacketSpec, frame: BoostFrame) -> BoostedSpec:
    """Envelope parameters in the boosted frame (light-like dispersion only).

    Accepts any kz = 0 spec; the primed spec keeps the original regime, so a
    general-regime spec keeps evaluating through quadrature.
    """
    if spec.kz != 0.0 or spec.regime is Regime.PARAXIAL:
        raise ValueError("envelope boosting is exact only for kz = 0 specs")
    dm, dp = doppler_factors(frame.v)
    primed = WavepacketSpec(
        alpha=spec.alpha,
        k0R=dm * spec.k0R, k0L=dp * spec.k0L,
        sigmaR=dm * spec.sigmaR, sigmaL=dp * spec.sigmaL,
        kz=0.0, regime=spec.regime)
    return BoostedSpec(spec=primed, frame=frame)


def positivity_frame(spec: WavepacketSpec,
                     optical_ratio: float = 5.0) -> BoostFrame:
    """Boost v = (k0R - k0L)/(k0R + k0L) equalising the centre wavenumbers.

    In the returned frame both centres sit at sqrt(k0R k0L) and the density
    is non-negative wherever it is not exponentially suppressed.
    """
    if not spec.is_optical(optical_ratio):
        raise NonOpticalSpec(
            f"positivity frame requires k0 >= {optical_ratio} sigma for both movers")
    if spec.kz != 0.0 or spec.regime is Regime.PARAXIAL:
        raise ValueError("positivity frame applies to kz = 0 specs")
    return BoostFrame(v=(spec.k0R - spec.k0L) / (spec.k0R + spec.k0L))


def compose_boosts(v1: float, v2: float) -> float:
    """Velocity of the single boost equivalent to boost(v1) then boost(v2)."""
    return (v1 + v2) / (1.0 + v1 * v2)
