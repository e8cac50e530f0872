"""Weak values, conserved current and density, velocity field, quantum potential.

The detected field is the relativistically normalised wavefunction: each
travelling component is divided by sqrt(2 E0) with E0 its centre energy
(E0 = k0 head-on, E0 = kz paraxial, E0 = sqrt(k0^2 + kz^2) in general).
With this normalisation (j, rho) = (2 Im psi* d_x psi, -2 Im psi* d_t psi)
transforms exactly as a Lorentz two-vector for light-like dispersion, and the
symmetric-packet forms reduce to the standard 1/(2 k0) convention.

Closed forms are used wherever the regime permits; the quadrature path is
reserved for the general dispersion.  Densities are reported signed, never
clipped; interpreting negative-density regions is left to diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    RHO_FLOOR,
    FieldSample,
    Regime,
    SpacetimePoint,
    Undefined,
    WavepacketSpec,
)
from .wavefunction import (
    QuadratureRule,
    build_quadrature_rule,
    general_parts_checked,
    headon_parts,
    paraxial_parts,
    paraxial_second_derivative,
)

__all__ = [
    "UndefinedAtNode",
    "WeakValuePair",
    "centre_energies",
    "scalar_psi",
    "weak_momentum",
    "weak_energy",
    "weak_values",
    "current_density",
    "current_density_grid",
    "velocity",
    "velocity_grid",
    "quantum_potential",
    "paraxial_decomposition",
    "field_sample",
    "field_grid",
]


class UndefinedAtNode(ValueError):
    """Requested a pointwise quantity where |psi|^2 is below the floor."""


@dataclass(frozen=True)
class WeakValuePair:
    """Post-selected momentum and energy averages at one spacetime point."""

    k_weak: float
    H_weak: float
    point: SpacetimePoint


def centre_energies(spec: WavepacketSpec) -> tuple[float, float]:
    """Centre energy of each travelling component under the spec's dispersion."""
    if spec.regime is Regime.HEAD_ON:
        return spec.k0R, spec.k0L
    if spec.regime is Regime.PARAXIAL:
        return spec.kz, spec.kz
    return math.hypot(spec.k0R, spec.kz), math.hypot(spec.k0L, spec.kz)


def scalar_psi(spec: WavepacketSpec, t, x, rule: QuadratureRule | None = None):
    """Normalised field and true derivatives: (psi, dpsi_dx, dpsi_dt) arrays."""
    er, el = centre_energies(spec)
    wR = math.sqrt(spec.alpha) / math.sqrt(2.0 * er)
    wL = math.sqrt(1.0 - spec.alpha) / math.sqrt(2.0 * el)
    if spec.regime is Regime.HEAD_ON:
        psiR, psiL, dR, dL = headon_parts(spec, t, x)
        psi = wR * psiR + wL * psiL
        dpsi_dx = -wR * dR + wL * dL
        dpsi_dt = wR * dR + wL * dL
        return psi, dpsi_dx, dpsi_dt
    if spec.regime is Regime.PARAXIAL:
        GR, GL, dRx, dLx, dRt, dLt = paraxial_parts(spec, t, x)
        carrier = np.exp(-1j * spec.kz * np.asarray(t, dtype=float))
        env = wR * GR + wL * GL
        psi = carrier * env
        dpsi_dx = carrier * (wR * dRx + wL * dLx)
        dpsi_dt = carrier * (-1j * spec.kz * env + wR * dRt + wL * dLt)
        return psi, dpsi_dx, dpsi_dt
    if rule is None:
        tm = float(np.max(np.abs(t))) if np.size(t) else 1.0
        xm = float(np.max(np.abs(x))) if np.size(x) else 1.0
        rule = build_quadrature_rule(spec, tm, xm)
    shape = np.broadcast(np.asarray(t, dtype=float), np.asarray(x, dtype=float)).shape
    tb = np.broadcast_to(np.asarray(t, dtype=float), shape).ravel()
    xb = np.broadcast_to(np.asarray(x, dtype=float), shape).ravel()
    (pR, pL, dxR, dxL, dtR, dtL), _ = general_parts_checked(spec, tb, xb, rule)
    psi = (wR * pR + wL * pL).reshape(shape)
    dpsi_dx = (wR * dxR + wL * dxL).reshape(shape)
    dpsi_dt = (wR * dtR + wL * dtL).reshape(shape)
    return psi, dpsi_dx, dpsi_dt


# ---------------------------------------------------------------------------
# Weak values
# ---------------------------------------------------------------------------

def weak_values(spec: WavepacketSpec, p: SpacetimePoint,
                rule: QuadratureRule | None = None) -> WeakValuePair:
    psi, dx, dt = scalar_psi(spec, p.t, p.x, rule)
    dens = float(np.abs(psi)) ** 2
    if dens <= RHO_FLOOR:
        raise UndefinedAtNode(f"|psi|^2 = {dens:.3e} <= {RHO_FLOOR} at {p}")
    k_w = float(np.real(-1j * np.conj(psi) * dx)) / dens
    h_w = float(np.real(1j * np.conj(psi) * dt)) / dens
    return WeakValuePair(k_weak=k_w, H_weak=h_w, point=p)


def weak_momentum(spec: WavepacketSpec, p: SpacetimePoint,
                  rule: QuadratureRule | None = None) -> float:
    """Re[(-i) psi* d_x psi] / |psi|^2."""
    return weak_values(spec, p, rule).k_weak


def weak_energy(spec: WavepacketSpec, p: SpacetimePoint,
                rule: QuadratureRule | None = None) -> float:
    """Re[(+i) psi* d_t psi] / |psi|^2 (positive for forward-propagating packets)."""
    return weak_values(spec, p, rule).H_weak


# ---------------------------------------------------------------------------
# Current and density
# ---------------------------------------------------------------------------

def _headon_mu_nu_theta(spec: WavepacketSpec, t, x):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    u = t - x
    v = t + x
    mu = math.sqrt(spec.alpha) * (2.0 * spec.sigmaR ** 2 / math.pi) ** 0.25 \
        * np.exp(-spec.sigmaR ** 2 * u * u)
    nu = math.sqrt(1.0 - spec.alpha) * (2.0 * spec.sigmaL ** 2 / math.pi) ** 0.25 \
        * np.exp(-spec.sigmaL ** 2 * v * v)
    theta = spec.k0L * v - spec.k0R * u
    return u, v, mu, nu, theta


def _headon_current_density(spec: WavepacketSpec, t, x):
    """Light-cone closed forms for (j, rho); exact for any envelope parameters."""
    u, v, mu, nu, theta = _headon_mu_nu_theta(spec, t, x)
    gm = math.sqrt(spec.k0R * spec.k0L)
    both = mu * nu / gm
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    sum_sig = v * spec.sigmaL ** 2 + u * spec.sigmaR ** 2
    dif_sig = v * spec.sigmaL ** 2 - u * spec.sigmaR ** 2
    j = mu * mu - nu * nu + both * ((spec.k0R - spec.k0L) * cos_t + 2.0 * sum_sig * sin_t)
    rho = mu * mu + nu * nu + both * ((spec.k0R + spec.k0L) * cos_t - 2.0 * dif_sig * sin_t)
    return j, rho


def paraxial_decomposition(spec: WavepacketSpec, t, x) -> dict[str, np.ndarray]:
    """Left/right/interference split of the paraxial current and density.

    Valid for symmetric packets (equal k0, sigma).  Sums satisfy
    j = jL + jR + jI, rho = rhoL + rhoR + rhoI with exact continuity under the
    quadratic dispersion.
    """
    if not spec.is_symmetric:
        raise ValueError("paraxial decomposition requires a symmetric spec")
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    a, k0, s, kz = spec.alpha, spec.k0R, spec.sigmaR, spec.kz
    denom = kz * kz + 4.0 * t * t * s ** 4
    K0 = math.sqrt(2.0 / math.pi) * s * kz / np.sqrt(denom)
    M0 = math.sqrt(2.0 / math.pi) * s * kz / denom ** 1.5
    phase = 2.0 * k0 * kz * kz * x / denom
    ktx = k0 * k0 * t * t + kz * kz * x * x
    env_r = np.exp(-2.0 * (k0 * t - kz * x) ** 2 * s * s / denom)
    env_l = np.exp(-2.0 * (k0 * t + kz * x) ** 2 * s * s / denom)
    env_i = np.exp(-2.0 * ktx * s * s / denom)
    cross = math.sqrt(a * (1.0 - a))
    rhoR = a * K0 * env_r
    rhoL = (1.0 - a) * K0 * env_l
    rhoI = cross * 2.0 * K0 * np.cos(phase) * env_i
    jR = a * M0 * (k0 * kz + 4.0 * t * x * s ** 4) * env_r
    jL = -(1.0 - a) * M0 * (k0 * kz - 4.0 * t * x * s ** 4) * env_l
    jI = cross * 4.0 * s * s * t * M0 * (2.0 * x * s * s * np.cos(phase)
                                         + k0 * np.sin(phase)) * env_i
    return {"jL": jL, "jR": jR, "jI": jI, "rhoL": rhoL, "rhoR": rhoR, "rhoI": rhoI}


def _paraxial_current_density(spec: WavepacketSpec, t, x):
    if spec.is_symmetric:
        d = paraxial_decomposition(spec, t, x)
        return d["jL"] + d["jR"] + d["jI"], d["rhoL"] + d["rhoR"] + d["rhoI"]
    GR, GL, dRx, dLx, _, _ = paraxial_parts(spec, t, x)
    wR = math.sqrt(spec.alpha)
    wL = math.sqrt(1.0 - spec.alpha)
    env = wR * GR + wL * GL
    denv = wR * dRx + wL * dLx
    rho = np.abs(env) ** 2
    j = np.imag(np.conj(env) * denv) / spec.kz
    return j, rho


def current_density_grid(spec: WavepacketSpec, t, x,
                         rule: QuadratureRule | None = None):
    """(j, rho) over broadcastable arrays t, x."""
    if spec.regime is Regime.HEAD_ON:
        return _headon_current_density(spec, t, x)
    if spec.regime is Regime.PARAXIAL:
        return _paraxial_current_density(spec, t, x)
    psi, dx, dt = scalar_psi(spec, t, x, rule)
    j = 2.0 * np.imag(np.conj(psi) * dx)
    rho = -2.0 * np.imag(np.conj(psi) * dt)
    return j, rho


def current_density(spec: WavepacketSpec, p: SpacetimePoint,
                    rule: QuadratureRule | None = None) -> tuple[float, float]:
    """Conserved current and (signed, never clipped) density at one point."""
    j, rho = current_density_grid(spec, p.t, p.x, rule)
    return float(j), float(rho)


# ---------------------------------------------------------------------------
# Velocity
# ---------------------------------------------------------------------------

def velocity(spec: WavepacketSpec, p: SpacetimePoint,
             rule: QuadratureRule | None = None):
    """j/rho where |rho| > RHO_FLOOR, else Undefined.

    Equals weak_momentum/weak_energy wherever both are defined (exactly for
    the head-on and general regimes; for the paraxial regime up to the
    dropped second-spatial-derivative term of the quadratic dispersion).
    """
    j, rho = current_density(spec, p, rule)
    if abs(rho) <= RHO_FLOOR:
        return Undefined()
    return j / rho


def velocity_grid(spec: WavepacketSpec, t, x,
                  rule: QuadratureRule | None = None) -> np.ndarray:
    """Vectorised velocity; nan marks undefined points."""
    j, rho = current_density_grid(spec, t, x, rule)
    out = np.full(np.shape(rho), np.nan)
    mask = np.abs(rho) > RHO_FLOOR
    np.divide(j, rho, out=out, where=mask)
    return out


# ---------------------------------------------------------------------------
# Quantum potential (paraxial)
# ---------------------------------------------------------------------------

def quantum_potential(spec: WavepacketSpec, p: SpacetimePoint) -> float:
    """Q = -(1/2 kz) R''/R with R = |psi|, by exact symbolic differentiation."""
    if spec.regime is not Regime.PARAXIAL:
        raise ValueError("quantum potential is defined for the paraxial regime")
    psi, dpsi, _ = scalar_psi(spec, p.t, p.x)
    d2psi = paraxial_second_derivative(spec, p.t, p.x) / math.sqrt(2.0 * spec.kz)
    dens = float(np.abs(psi)) ** 2
    if dens <= RHO_FLOOR or not math.sqrt(dens) > 0.0:
        raise UndefinedAtNode(f"|psi| too small at {p}")
    re_pd = float(np.real(np.conj(psi) * dpsi))
    num = float(np.abs(dpsi)) ** 2 + float(np.real(np.conj(psi) * d2psi)) \
        - re_pd * re_pd / dens
    return -num / (2.0 * spec.kz * dens)


# ---------------------------------------------------------------------------
# Field samples
# ---------------------------------------------------------------------------

def field_sample(spec: WavepacketSpec, p: SpacetimePoint,
                 rule: QuadratureRule | None = None) -> FieldSample:
    psi, dx, dt = scalar_psi(spec, p.t, p.x, rule)
    j, rho = current_density(spec, p, rule)
    vel = np.nan if abs(rho) <= RHO_FLOOR else j / rho
    return FieldSample(point=p, psi=complex(psi), dpsi_dx=complex(dx),
                       dpsi_dt=complex(dt), j=j, rho=rho, V=float(vel))


def field_grid(spec: WavepacketSpec, t, x, rule: QuadratureRule | None = None):
    """All field arrays over broadcastable t, x: (psi, dpsi_dx, dpsi_dt, j, rho, V)."""
    psi, dx, dt = scalar_psi(spec, t, x, rule)
    if spec.regime is Regime.GENERAL:
        # Reuse the quadrature evaluation instead of integrating twice.
        j = 2.0 * np.imag(np.conj(psi) * dx)
        rho = -2.0 * np.imag(np.conj(psi) * dt)
    else:
        j, rho = current_density_grid(spec, t, x, rule)
    vel = np.full(np.shape(rho), np.nan)
    mask = np.abs(rho) > RHO_FLOOR
    np.divide(j, rho, out=vel, where=mask)
    return psi, dx, dt, j, rho, vel
