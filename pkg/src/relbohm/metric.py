"""Warp-metric consistency view of the velocity field.

The 1+1 dimensional line element ds^2 = -(1 - vs^2) dt^2 - 2 vs dx dt + dx^2
with shift vs = (|V| - 1) sgn(V) makes the coordinate light speed equal the
local transport velocity V = j/rho, so every trajectory is null in this
metric; null_residual measures how exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RHO_FLOOR, SpacetimePoint, WavepacketSpec
from .observables import UndefinedAtNode, current_density, velocity_grid
from .trajectories import Trajectory
from .wavefunction import QuadratureRule

__all__ = [
    "MetricSample",
    "sgn",
    "shift_field",
    "shift_from_velocity",
    "metric_sample",
    "null_quadratic",
    "null_residual",
]


def sgn(value: float) -> float:
    """+1 on positive values, -1 on non-positive values."""
    return 1.0 if value > 0.0 else -1.0


@dataclass(frozen=True)
class MetricSample:
    point: SpacetimePoint
    v_s: float
    g_tt: float
    g_tx: float
    g_xx: float


def shift_from_velocity(V):
    """Shift field from a velocity value or array: (|V| - 1) sgn(V)."""
    V = np.asarray(V, dtype=float)
    s = np.where(V > 0.0, 1.0, -1.0)
    out = (np.abs(V) - 1.0) * s
    return out if out.shape else float(out)


def shift_field(spec: WavepacketSpec, p: SpacetimePoint,
                rule: QuadratureRule | None = None) -> float:
    j, rho = current_density(spec, p, rule)
    if abs(rho) <= RHO_FLOOR:
        raise UndefinedAtNode(f"|rho| <= {RHO_FLOOR} at {p}")
    return float(shift_from_velocity(j / rho))


def metric_sample(spec: WavepacketSpec, p: SpacetimePoint,
                  rule: QuadratureRule | None = None) -> MetricSample:
    v_s = shift_field(spec, p, rule)
    return MetricSample(point=p, v_s=v_s, g_tt=-(1.0 - v_s * v_s),
                        g_tx=-v_s, g_xx=1.0)


def null_quadratic(v_s, V):
    """ds^2/dt^2 along dx/dt = V: -(1 - vs^2) - 2 vs V + V^2."""
    v_s = np.asarray(v_s, dtype=float)
    V = np.asarray(V, dtype=float)
    return -(1.0 - v_s * v_s) - 2.0 * v_s * V + V * V


def null_residual(traj: Trajectory, spec: WavepacketSpec,
                  rule: QuadratureRule | None = None) -> float:
    """Max |ds^2/dt^2| over the trajectory's samples; skips undefined points."""
    ok = ~np.isnan(traj.x)
    if not np.any(ok):
        return 0.0
    V = velocity_grid(spec, traj.t[ok], traj.x[ok], rule)
    defined = ~np.isnan(V)
    if not np.any(defined):
        return 0.0
    v_s = shift_from_velocity(V[defined])
    res = null_quadratic(v_s, V[defined])
    return float(np.max(np.abs(res)))
