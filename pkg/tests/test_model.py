import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from plprelay.model import ModelParams, db_to_linear, default_params, derive_scales


def test_unit_ratios_give_squared_distances():
    p = ModelParams(mu=1, threshold=1, kappa=1, nu=1, eta=2.5)
    s = derive_scales(p.with_(eta=2.5), 1.0, 1.0, 2.0)
    assert (s.s5, s.s6, s.s3, s.s4) == (1.0, 1.0, 1.0, 1.0)
    assert s.s7 == pytest.approx(2.0**2.5)
    assert s.s8 == pytest.approx(2.0**2.5)


def test_hand_substituted_scales():
    p = ModelParams(mu=1, threshold=2, kappa=4, nu=1, eta=4)
    s = derive_scales(p, r0=0.75, r1=0.5, rb1=1.0)
    assert s.s5 == pytest.approx(0.5)
    assert s.s6 == pytest.approx(0.125)
    assert s.s7 == pytest.approx(2.0)
    assert s.s8 == pytest.approx(0.5)
    assert s.s3 == pytest.approx(0.6328125)
    assert s.s4 == pytest.approx(0.158203125)


@given(st.floats(0.01, 2.0), st.floats(0.01, 1.0), st.floats(0.0, 1.0))
def test_scales_vanish_with_threshold(r0, r1, extra):
    p = ModelParams(threshold=1e-300)
    s = derive_scales(p, r0, r1, r1 + extra + 1e-3)
    assert max(s.s3, s.s4, s.s5, s.s6, s.s7, s.s8) < 1e-290


def test_relay_must_be_nearer_than_serving_rsu():
    with pytest.raises(ValueError):
        derive_scales(ModelParams(), 0.1, 0.5, 0.5)
    with pytest.raises(ValueError):
        derive_scales(ModelParams(), -0.1, 0.1, 0.5)


@pytest.mark.parametrize(
    "field,value",
    [("rho", 0), ("lambda_ru", 0), ("lambda_v", -1), ("p1", 1.5), ("mu", 0), ("eta", 2.0),
     ("threshold", 0), ("noise", -1), ("kappa", 0), ("nu", 0), ("rho", float("nan"))],
)
def test_invalid_parameters_are_rejected(field, value):
    with pytest.raises(ValueError, match=field):
        ModelParams(**{field: value})


def test_derived_densities():
    p = ModelParams(rho=3.0, p1=0.25, lambda_v=8.0)
    assert p.lambda_l == pytest.approx(3.0 / math.pi)
    assert p.lambda_vt == pytest.approx(2.0)


def test_default_noise_gives_ten_db_median_snr_at_quarter_km():
    p = default_params()
    median_snr = p.kappa * math.log(2.0) / p.mu * 0.25 ** (-p.eta) / p.noise
    assert 10 * math.log10(median_snr) == pytest.approx(10.0)
    assert p.threshold_db == pytest.approx(0.0)
    assert db_to_linear(10.0) == pytest.approx(10.0)
