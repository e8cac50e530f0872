import math

import pytest
from hypothesis import given, strategies as st

from relbohm.core import (
    BoostFrame,
    ConfigError,
    GridSpec,
    Regime,
    RunConfig,
    Undefined,
    WavepacketSpec,
    is_defined,
    parse_config,
    serialize_config,
    validate_spec,
)


def test_validate_fig2_spec_is_optical():
    spec = WavepacketSpec.symmetric(0.5, 15.0, 1.0, 0.0, Regime.HEAD_ON)
    report = validate_spec(spec)
    assert report.ok
    assert report.optical


def test_validate_low_frequency_not_optical():
    spec = WavepacketSpec.symmetric(0.5, 3.0, 1.0, 0.0, Regime.HEAD_ON)
    report = validate_spec(spec)
    assert report.ok
    assert not report.optical


def test_validate_alpha_out_of_range():
    spec = WavepacketSpec(alpha=1.2, k0R=15.0, k0L=15.0, sigmaR=1.0,
                          sigmaL=1.0, kz=0.0, regime=Regime.HEAD_ON)
    report = validate_spec(spec)
    assert any("alpha" in v for v in report.violations)
    assert not report.optical


def test_validate_regime_kz_constraints():
    headon_kz = WavepacketSpec.symmetric(0.5, 15.0, 1.0, 2.0, Regime.HEAD_ON)
    assert not validate_spec(headon_kz).ok
    paraxial_no_kz = WavepacketSpec.symmetric(0.5, 5.0, 1.0, 0.0, Regime.PARAXIAL)
    assert not validate_spec(paraxial_no_kz).ok


def test_validate_is_pure():
    spec = WavepacketSpec.symmetric(0.7, 9.0)
    assert validate_spec(spec) == validate_spec(spec)


def test_configurable_optical_ratio():
    spec = WavepacketSpec.symmetric(0.5, 6.0)
    assert validate_spec(spec, optical_ratio=5.0).optical
    assert not validate_spec(spec, optical_ratio=7.0).optical


def test_parse_shorthand_sets_both_sides():
    cfg = parse_config("alpha=1.0\nk0=15\nsigma=1\nregime=headon\n")
    assert cfg.spec.k0R == cfg.spec.k0L == 15.0
    assert cfg.spec.sigmaR == cfg.spec.sigmaL == 1.0
    assert cfg.spec.regime is Regime.HEAD_ON


def test_parse_fig4_preset_line():
    cfg = parse_config("alpha=0.5\nk0=6\nkz=24\nregime=general\n")
    assert cfg.spec.k0R == 6.0
    assert cfg.spec.kz == 24.0
    assert cfg.spec.regime is Regime.GENERAL


def test_parse_alpha_domain_error():
    with pytest.raises(ConfigError) as err:
        parse_config("alpha=2\n")
    assert err.value.key == "alpha"


def test_parse_unknown_key_carries_lineno():
    with pytest.raises(ConfigError) as err:
        parse_config("alpha=0.5\nbogus=1\n")
    assert err.value.lineno == 2


def test_parse_duplicate_key_rejected():
    with pytest.raises(ConfigError):
        parse_config("alpha=0.5\nalpha=0.6\nk0=15\nregime=headon\n")


def test_parse_shorthand_conflict_rejected():
    with pytest.raises(ConfigError):
        parse_config("alpha=0.5\nk0=15\nk0R=14\nregime=headon\n")


def test_parse_missing_required():
    with pytest.raises(ConfigError):
        parse_config("alpha=0.5\nregime=headon\n")
    with pytest.raises(ConfigError):
        parse_config("alpha=0.5\nk0=15\n")


def test_parse_rejects_bad_regime_and_types():
    with pytest.raises(ConfigError):
        parse_config("alpha=0.5\nk0=15\nregime=sideways\n")
    with pytest.raises(ConfigError):
        parse_config("alpha=0.5\nk0=15\nregime=headon\nnt=many\n")
    with pytest.raises(ConfigError):
        parse_config("alpha=0.5\nk0=15\nregime=headon\nboost_v=1.5\n")


def test_comments_and_blank_lines_ignored():
    cfg = parse_config("# scenario\n\nalpha=0.5\nk0=15\nregime=headon\n")
    assert cfg.spec.alpha == 0.5


def test_round_trip_fig_presets():
    for text in ("alpha=0.5\nk0=15\nsigma=1\nregime=headon\nboost_v=0.125\n",
                 "alpha=0.25\nk0R=20\nk0L=10\nsigmaR=0.5\nsigmaL=2\nregime=headon\nnt=33\n"):
        cfg = parse_config(text)
        assert parse_config(serialize_config(cfg)) == cfg


@given(
    alpha=st.floats(0.0, 1.0),
    k0R=st.floats(0.5, 200.0),
    k0L=st.floats(0.5, 200.0),
    sigmaR=st.floats(0.1, 10.0),
    sigmaL=st.floats(0.1, 10.0),
    boost_v=st.floats(-0.99, 0.99),
    nt=st.integers(2, 500),
    seed=st.integers(0, 2**31 - 1),
)
def test_round_trip_property(alpha, k0R, k0L, sigmaR, sigmaL, boost_v, nt, seed):
    spec = WavepacketSpec(alpha=alpha, k0R=k0R, k0L=k0L, sigmaR=sigmaR,
                          sigmaL=sigmaL, kz=0.0, regime=Regime.HEAD_ON)
    cfg = RunConfig(spec=spec, grid=GridSpec(-4, 4, -8, 8, nt, 77),
                    boost_v=boost_v, seed=seed)
    assert parse_config(serialize_config(cfg)) == cfg


def test_boost_frame_gamma():
    f = BoostFrame(v=0.125)
    assert math.isclose(f.gamma, 1.0 / math.sqrt(1 - 0.125**2), rel_tol=1e-15)
    with pytest.raises(ValueError):
        BoostFrame(v=1.0)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(0, 0, -1, 1, 10, 10)
    with pytest.raises(ValueError):
        GridSpec(-1, 1, -1, 1, 1, 10)
    g = GridSpec(-1, 1, -2, 2, 5, 9)
    assert g.ts().shape == (5,)
    assert g.xs()[0] == -2.0


def test_undefined_sentinel():
    assert not is_defined(Undefined())
    assert not is_defined(float("nan"))
    assert is_defined(0.5)
