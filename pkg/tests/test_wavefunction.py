import numpy as np
import pytest

from relbohm.core import Regime, SpacetimePoint, WavepacketSpec
from relbohm.wavefunction import (
    EvalMethod,
    QuadratureNotConverged,
    build_quadrature_rule,
    eval_general,
    eval_general_grid,
    eval_headon,
    eval_paraxial,
    eval_psi,
)

from oracles import psi_quad

HEADON = WavepacketSpec.symmetric(0.5, 15.0, 1.0, 0.0, Regime.HEAD_ON)
PARAXIAL = WavepacketSpec.symmetric(0.5, 5.0, 1.0, 500.0, Regime.PARAXIAL)
GENERAL4 = WavepacketSpec.symmetric(0.5, 6.0, 1.0, 24.0, Regime.GENERAL)

# Frozen from tests/oracles.py (scipy.integrate.quad of the defining
# integrals at 1e-13 relative accuracy).
PSI_HEADON_03_M07 = 0.3402717196585523 - 0.30149040710804714j
PSI_PARAXIAL_10_02 = 0.23069470414758814 + 0.6102678027478368j
PSI_GENERAL_15_M04 = -0.6959102506511025 - 0.21598897267416745j


def test_headon_peak_value_alpha1():
    spec = WavepacketSpec.symmetric(1.0, 15.0)
    ev = eval_headon(spec, SpacetimePoint(0.0, 0.0))
    assert ev.method is EvalMethod.CLOSED_HEAD_ON
    assert ev.est_quad_error == 0.0
    assert ev.psi == pytest.approx((2.0 / np.pi) ** 0.25, abs=1e-15)
    assert abs(ev.psi.imag) < 1e-15


def test_headon_matches_frozen_oracle():
    ev = eval_headon(HEADON, SpacetimePoint(0.3, -0.7))
    assert abs(ev.psi - PSI_HEADON_03_M07) < 1e-10 * abs(PSI_HEADON_03_M07)


def test_headon_rigid_translation_alpha1():
    spec = WavepacketSpec.symmetric(1.0, 15.0)
    rng = np.random.default_rng(7)
    for t, x in rng.uniform(-3, 3, size=(25, 2)):
        moving = eval_headon(spec, SpacetimePoint(t, x)).psi
        initial = eval_headon(spec, SpacetimePoint(0.0, x - t)).psi
        assert abs(abs(moving) - abs(initial)) < 1e-12
        assert abs(moving - initial) < 1e-12  # function of t - x only


def test_headon_left_mover_depends_on_t_plus_x():
    spec = WavepacketSpec.symmetric(0.0, 15.0)
    rng = np.random.default_rng(8)
    for t, x in rng.uniform(-3, 3, size=(25, 2)):
        assert abs(eval_headon(spec, SpacetimePoint(t, x)).psi
                   - eval_headon(spec, SpacetimePoint(0.0, x + t)).psi) < 1e-12


def test_linearity_in_component_amplitudes():
    rng = np.random.default_rng(9)
    for regime, spec in (("headon", HEADON), ("paraxial", PARAXIAL)):
        right = WavepacketSpec(alpha=1.0, k0R=spec.k0R, k0L=spec.k0L,
                               sigmaR=spec.sigmaR, sigmaL=spec.sigmaL,
                               kz=spec.kz, regime=spec.regime)
        left = WavepacketSpec(alpha=0.0, k0R=spec.k0R, k0L=spec.k0L,
                              sigmaR=spec.sigmaR, sigmaL=spec.sigmaL,
                              kz=spec.kz, regime=spec.regime)
        for t, x in rng.uniform(-2, 2, size=(10, 2)):
            p = SpacetimePoint(t, x)
            combo = eval_psi(spec, p).psi
            parts = (np.sqrt(spec.alpha) * eval_psi(right, p).psi
                     + np.sqrt(1 - spec.alpha) * eval_psi(left, p).psi)
            assert abs(combo - parts) < 1e-13


PARAXIAL_SLOW = WavepacketSpec.symmetric(0.5, 2.0, 1.0, 15.0, Regime.PARAXIAL)
GENERAL_SLOW = WavepacketSpec.symmetric(0.5, 6.0, 1.0, 8.0, Regime.GENERAL)


@pytest.mark.parametrize("spec,point", [
    (HEADON, SpacetimePoint(0.3, -0.7)),
    (HEADON, SpacetimePoint(-1.2, 2.4)),
    (PARAXIAL_SLOW, SpacetimePoint(3.0, 0.2)),
    (PARAXIAL_SLOW, SpacetimePoint(8.0, -1.1)),
    (GENERAL_SLOW, SpacetimePoint(1.5, -0.4)),
])
def test_derivative_finite_difference_consistency(spec, point):
    # Relative tolerance 1e-6 at h=1e-4 against O(h^2) central differences,
    # in every regime.  The h^2 truncation of the differences themselves is
    # (E h)^2/6, so the check runs at carrier frequencies that keep that
    # term inside the bound (the bound tests the derivatives, not the FD).
    h = 1e-4
    rule = (build_quadrature_rule(spec, abs(point.t) + h, abs(point.x) + h)
            if spec.regime is Regime.GENERAL else None)

    def ev(t, x):
        return eval_psi(spec, SpacetimePoint(t, x), rule)

    base = ev(point.t, point.x)
    fd_x = (ev(point.t, point.x + h).psi - ev(point.t, point.x - h).psi) / (2 * h)
    fd_t = (ev(point.t + h, point.x).psi - ev(point.t - h, point.x).psi) / (2 * h)
    assert abs(base.dpsi_dx - fd_x) <= 1e-6 * max(abs(base.dpsi_dx), 1.0)
    assert abs(base.dpsi_dt - fd_t) <= 1e-6 * max(abs(base.dpsi_dt), 1.0)


@pytest.mark.parametrize("spec,point,scale", [
    (PARAXIAL, SpacetimePoint(10.0, 0.2), 500.0),
    (GENERAL4, SpacetimePoint(1.5, -0.4), 25.0),
])
def test_derivative_consistency_high_frequency(spec, point, scale):
    # Same check at the figure presets, with the FD truncation budget
    # (E h)^2/3 added to the tolerance.
    h = 1e-4
    rule = (build_quadrature_rule(spec, abs(point.t) + h, abs(point.x) + h)
            if spec.regime is Regime.GENERAL else None)

    def ev(t, x):
        return eval_psi(spec, SpacetimePoint(t, x), rule)

    base = ev(point.t, point.x)
    fd_x = (ev(point.t, point.x + h).psi - ev(point.t, point.x - h).psi) / (2 * h)
    fd_t = (ev(point.t + h, point.x).psi - ev(point.t - h, point.x).psi) / (2 * h)
    tol = 1e-6 + (scale * h) ** 2 / 3.0
    assert abs(base.dpsi_dx - fd_x) <= tol * max(abs(base.dpsi_dx), 1.0)
    assert abs(base.dpsi_dt - fd_t) <= tol * max(abs(base.dpsi_dt), 1.0)


def test_paraxial_gaussian_profile_at_t0():
    spec = WavepacketSpec.symmetric(1.0, 5.0, 1.0, 500.0, Regime.PARAXIAL)
    xs = np.linspace(-2.0, 2.0, 41)
    dens = np.array([abs(eval_paraxial(spec, SpacetimePoint(0.0, x)).psi) ** 2
                     for x in xs])
    expected = np.sqrt(2.0 / np.pi) * np.exp(-2.0 * xs**2)
    assert np.max(np.abs(dens - expected)) < 1e-12


def test_paraxial_matches_frozen_oracle():
    ev = eval_paraxial(PARAXIAL, SpacetimePoint(10.0, 0.2))
    assert abs(ev.psi - PSI_PARAXIAL_10_02) < 1e-9 * abs(PSI_PARAXIAL_10_02)


def test_paraxial_dispersionless_limit():
    # kz -> infinity at fixed t: the envelope stops spreading and the
    # carrier-stripped wavefunction matches its t=0 profile.
    big = WavepacketSpec.symmetric(0.5, 5.0, 1.0, 1e10, Regime.PARAXIAL)
    for x in (-0.7, 0.0, 1.3):
        frozen = eval_paraxial(big, SpacetimePoint(10.0, x)).psi \
            * np.exp(1j * big.kz * 10.0)
        initial = eval_paraxial(big, SpacetimePoint(0.0, x)).psi
        assert abs(frozen - initial) < 1e-6


def test_general_matches_headon_at_kz0():
    spec = WavepacketSpec.symmetric(0.5, 15.0, 1.0, 0.0, Regime.GENERAL)
    rule = build_quadrature_rule(spec, 5.0, 5.0)
    scale = abs(eval_headon(HEADON, SpacetimePoint(0.0, 0.0)).psi)
    worst = 0.0
    for t, x in [(0.0, 0.0), (0.3, -0.7), (3.0, 2.0), (5.0, -5.0), (2.5, 4.9)]:
        quad_ev = eval_general(spec, SpacetimePoint(t, x), rule)
        closed = eval_headon(HEADON, SpacetimePoint(t, x))
        worst = max(worst, abs(quad_ev.psi - closed.psi) / scale)
    assert worst < 1e-8


def test_general_matches_frozen_oracle_fig4():
    rule = build_quadrature_rule(GENERAL4, 4.0, 5.0)
    ev = eval_general(GENERAL4, SpacetimePoint(1.5, -0.4), rule)
    assert abs(ev.psi - PSI_GENERAL_15_M04) < 1e-8
    assert ev.method is EvalMethod.QUADRATURE
    assert ev.est_quad_error < rule.tol


def test_general_rho_positive_at_fig4_origin():
    rule = build_quadrature_rule(GENERAL4, 4.0, 5.0)
    ev = eval_general(GENERAL4, SpacetimePoint(0.0, 0.0), rule)
    rho = -2.0 * np.imag(np.conj(ev.psi) * ev.dpsi_dt)
    assert rho > 0.0


def test_general_live_oracle_cross_check():
    rule = build_quadrature_rule(GENERAL4, 4.0, 5.0)
    want, _, _ = psi_quad(GENERAL4, 3.5, 2.0, "massive")
    got = eval_general(GENERAL4, SpacetimePoint(3.5, 2.0), rule).psi
    assert abs(got - want) < 1e-8


def test_quadrature_convergence_under_doubling():
    # The invariant: doubling nodes changes psi by less than the reported
    # estimate of the previous level.
    spec = GENERAL4
    rule = build_quadrature_rule(spec, 4.0, 5.0, min_nodes=16)
    fine_rule = build_quadrature_rule(spec, 4.0, 5.0, min_nodes=32)
    t = np.array([0.7, 2.1])
    x = np.array([-0.3, 1.9])
    psi_a, _, _, est_a = eval_general_grid(spec, t, x, rule)
    psi_b, _, _, _ = eval_general_grid(spec, t, x, fine_rule)
    assert np.max(np.abs(psi_b - psi_a)) <= max(est_a, 1e-14)


def test_quadrature_rule_bounds_cover_envelopes():
    rule = build_quadrature_rule(GENERAL4, 4.0, 5.0)
    assert rule.right.k_lo <= GENERAL4.k0R - 8.0 * GENERAL4.sigmaR
    assert rule.right.k_hi >= GENERAL4.k0R + 8.0 * GENERAL4.sigmaR
    assert rule.left.k_lo <= -GENERAL4.k0L - 8.0 * GENERAL4.sigmaL
    assert rule.left.k_hi >= -GENERAL4.k0L + 8.0 * GENERAL4.sigmaL
    assert rule.right.nodes.size >= rule.min_nodes


def test_quadrature_not_converged_raised():
    # A rule with far too few nodes for a highly oscillatory point cannot
    # converge within its refinement budget.
    spec = WavepacketSpec.symmetric(0.5, 15.0, 1.0, 0.0, Regime.GENERAL)
    rule = build_quadrature_rule(spec, 1.0, 1.0, min_nodes=4, tol=1e-13)
    weak = type(rule)(right=rule.right, left=rule.left, min_nodes=4,
                      tol=1e-13, max_refinements=0)
    with pytest.raises(QuadratureNotConverged):
        eval_general_grid(spec, np.array([40.0]), np.array([40.0]), weak)


def test_regime_dispatch_and_guards():
    assert eval_psi(HEADON, SpacetimePoint(0, 0)).method is EvalMethod.CLOSED_HEAD_ON
    assert eval_psi(PARAXIAL, SpacetimePoint(0, 0)).method is EvalMethod.CLOSED_PARAXIAL
    with pytest.raises(ValueError):
        eval_headon(PARAXIAL, SpacetimePoint(0, 0))
    with pytest.raises(ValueError):
        eval_paraxial(HEADON, SpacetimePoint(0, 0))
