"""Independent reference implementations used to freeze expected values.

Everything here goes through scipy.integrate.quad / cumulative trapezoids on
dense lattices and never touches the package's evaluation paths, so closed
forms and panel quadrature are checked against a genuinely separate route.
"""

import numpy as np
from scipy.integrate import quad

_QUAD_KW = dict(limit=800, epsabs=1e-14, epsrel=1e-13)


def envelope(k, center, sigma):
    return (2.0 * np.pi * sigma**2) ** -0.25 * np.exp(-(k - center) ** 2 / (4.0 * sigma**2))


def dispersion(kind, kz):
    if kind == "lightlike":
        return lambda k: np.abs(k)
    if kind == "massive":
        return lambda k: np.hypot(k, kz)
    if kind == "quadratic":
        return lambda k: kz + k * k / (2.0 * kz)
    raise ValueError(kind)


def psi_quad(spec, t, x, kind, weight_energy=False):
    """(2 pi)^(-1/2) Int dk f(k) e^{i(kx - E t)} summed over both movers.

    With weight_energy=True each mover is divided by sqrt(2 E0) with E0 the
    centre energy under the chosen dispersion (the package's normalisation).
    Returns (psi, dpsi_dx, dpsi_dt).
    """
    energy = dispersion(kind, spec.kz)

    def one(center, sigma, w):
        def make(extra):
            def re(k):
                return (w * envelope(k, center, sigma) * extra(k)
                        * np.exp(1j * (k * x - energy(k) * t))).real

            def im(k):
                return (w * envelope(k, center, sigma) * extra(k)
                        * np.exp(1j * (k * x - energy(k) * t))).imag

            lo, hi = center - 12 * sigma, center + 12 * sigma
            val = quad(re, lo, hi, **_QUAD_KW)[0] + 1j * quad(im, lo, hi, **_QUAD_KW)[0]
            return val / np.sqrt(2.0 * np.pi)

        return (make(lambda k: 1.0), make(lambda k: 1j * k),
                make(lambda k: -1j * energy(k)))

    wR = np.sqrt(spec.alpha)
    wL = np.sqrt(1.0 - spec.alpha)
    if weight_energy:
        wR /= np.sqrt(2.0 * energy(spec.k0R))
        wL /= np.sqrt(2.0 * energy(-spec.k0L))
    total = np.zeros(3, dtype=complex)
    if wR > 0:
        total += np.array(one(spec.k0R, spec.sigmaR, wR))
    if wL > 0:
        total += np.array(one(-spec.k0L, spec.sigmaL, wL))
    return total[0], total[1], total[2]


def current_density_quad(spec, t, x, kind):
    """(j, rho) from the energy-weighted oracle wavefunction."""
    psi, dx, dt = psi_quad(spec, t, x, kind, weight_energy=True)
    j = 2.0 * np.imag(np.conj(psi) * dx)
    rho = -2.0 * np.imag(np.conj(psi) * dt)
    return float(j), float(rho)


def cdf_quad(rho_fn, window, n=40001):
    """Cumulative trapezoid CDF of a density function on a window."""
    xs = np.linspace(window[0], window[1], n)
    rho = np.clip(np.array([rho_fn(x) for x in xs]), 0.0, None)
    dx = xs[1] - xs[0]
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * dx)])
    return xs, cdf / cdf[-1]
