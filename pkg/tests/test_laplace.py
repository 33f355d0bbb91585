import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from plprelay.distributions import ServingEvent
from plprelay.laplace import (
    Conditioning,
    InterferenceComponent,
    RsuKernel,
    joint_lt,
    joint_lt_own_line,
    line_exponent,
    single_lt,
    zeta2,
)
from plprelay.model import ModelParams

C = InterferenceComponent
ETA2 = SimpleNamespace(mu=1.0, eta=2.0, lambda_ru=1.0)


def test_zeta2_examples():
    assert zeta2(0.4, 0.3, 0.0, 0.0, ModelParams()) == 0.0
    assert zeta2(1.0, 0.0, 1.0, 1.0, ETA2) == pytest.approx(0.75)
    p = ModelParams()
    d = math.hypot(0.4, 0.3)
    assert zeta2(0.4, 0.3, 0.2, 0.0, p) == pytest.approx(1 - p.mu / (p.mu + 0.2 * d**-p.eta))


@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_zeta2_is_a_probability(x, y, sa, sb):
    z = zeta2(x, y, sa, sb, ModelParams())
    assert 0.0 <= z <= 1.0


def test_own_road_single_transform_arctan_form():
    s, rb1 = 0.7, 0.4
    exact = math.exp(-2 * ETA2.lambda_ru * math.sqrt(s) * (0.5 * math.pi - math.atan(rb1 / math.sqrt(s))))
    assert joint_lt_own_line(0.0, s, rb1, ETA2) == pytest.approx(exact, abs=1e-9)


def test_own_road_joint_transform_closed_form():
    # eta = 2, s_a = s_b = mu = 1: int_0^inf (2x^2 + 1)/(x^2 + 1)^2 dx = 3 pi / 4
    v = joint_lt_own_line(1.0, 1.0, 0.0, ETA2)
    single = joint_lt_own_line(1.0, 0.0, 0.0, ETA2)
    assert v == pytest.approx(math.exp(-1.5 * math.pi), rel=1e-9)
    assert single == pytest.approx(math.exp(-math.pi), rel=1e-9)
    assert single * single <= v <= single


def test_line_kernel_matches_scipy():
    p = ModelParams()
    for c, u, sa, sb in [(0.0, 0.0, 0.01, 0.0), (0.3, 0.1, 0.002, 0.05), (0.0, 0.8, 1.0, 1.0)]:
        assert line_exponent(c, u, sa, sb, p.mu, p.eta) == pytest.approx(
            oracles.road_integral(c, u, sa, sb, p), rel=1e-8, abs=1e-14
        )


@pytest.mark.parametrize("sa,sb", [(1e-3, 0.0), (5e-3, 2e-3), (0.0, 2e-2)])
def test_unconditioned_transforms_match_scipy(params, sa, sb):
    for comp, lam in ((C.I_RU, params.lambda_ru), (C.I_VT, params.lambda_vt)):
        ref = math.exp(oracles.log_unconditioned(sa, sb, params, lam))
        assert joint_lt(comp, sa, sb, params) == pytest.approx(ref, rel=1e-7)
    ref_own = math.exp(oracles.log_own_road(0.0, sa, sb, params, params.lambda_ru))
    assert joint_lt(C.I0, sa, sb, params) == pytest.approx(ref_own, rel=1e-7)


def test_own_road_conditioned_matches_direct_transform(params):
    cond = Conditioning(ServingEvent.own(), 0.25)
    for sa, sb in [(1e-3, 0.0), (4e-3, 1e-2)]:
        assert joint_lt(C.I0, sa, sb, params, cond) == pytest.approx(joint_lt_own_line(sa, sb, 0.25, params), rel=1e-8)


@pytest.mark.parametrize("r", [0.15, 0.4])
def test_own_road_service_components_match_scipy(params, r):
    cond = Conditioning(ServingEvent.own(), r)
    sa, sb = 3e-3, 1e-3
    assert joint_lt(C.I3, sa, sb, params, cond) == pytest.approx(
        math.exp(oracles.log_disk_roads(0.0, r, r, sa, sb, params)), rel=1e-7
    )
    assert joint_lt(C.I4, sa, sb, params, cond) == pytest.approx(
        math.exp(oracles.log_far_roads(r, sa, sb, params, params.lambda_ru)), rel=1e-7
    )
    assert joint_lt(C.I1, sa, sb, params, cond) == 1.0
    assert joint_lt(C.I2, sa, sb, params, cond) == 1.0


@pytest.mark.parametrize("n,y,r", [(1, 0.1, 0.3), (3, 0.25, 0.3), (2, 0.05, 0.5)])
def test_cross_road_service_components_match_scipy(params, n, y, r):
    cond = Conditioning(ServingEvent.cross(n, y), r)
    sa, sb = 2e-3, 4e-3
    p, lam = params, params.lambda_ru
    c = oracles.chord(r, y)
    expected = {
        C.I0: oracles.log_own_road(r, sa, sb, p, lam),
        C.I1: -2.0 * lam * oracles.road_integral(c, y, sa, sb, p),
        C.I2: (n - 1) * math.log(oracles.nearer_road_ratio(y, r, sa, sb, p)),
        C.I3: oracles.log_disk_roads(y, r, r, sa, sb, p),
        C.I4: oracles.log_far_roads(r, sa, sb, p, lam),
    }
    for comp, logv in expected.items():
        assert joint_lt(comp, sa, sb, p, cond) == pytest.approx(math.exp(logv), rel=1e-7), comp


def test_conditioned_total_is_product_of_parts(params):
    cond = Conditioning(ServingEvent.cross(2, 0.2), 0.35)
    parts = np.prod([joint_lt(c, 1e-3, 2e-3, params, cond) for c in (C.I0, C.I1, C.I2, C.I3, C.I4)])
    assert joint_lt(C.I_RU, 1e-3, 2e-3, params, cond) == pytest.approx(parts, rel=1e-12)


@given(st.sampled_from([C.I_RU, C.I_VT, C.I0]), st.floats(1e-5, 0.1), st.floats(1e-5, 0.1))
@settings(max_examples=25, deadline=None)
def test_joint_dominates_product_of_marginals(comp, sa, sb):
    p = ModelParams()
    joint = joint_lt(comp, sa, sb, p)
    assert joint >= single_lt(comp, sa, p) * single_lt(comp, sb, p) - 1e-14
    assert joint <= min(single_lt(comp, sa, p), single_lt(comp, sb, p)) + 1e-14


@given(st.floats(1e-5, 0.05), st.floats(1.1, 3.0))
@settings(max_examples=20, deadline=None)
def test_transform_decreases_in_scale(s, factor):
    p = ModelParams()
    assert single_lt(C.I_RU, s * factor, p) < single_lt(C.I_RU, s, p)


def test_zero_scales_and_identities(params):
    cond = Conditioning(ServingEvent.cross(1, 0.1), 0.2)
    for comp in C:
        c = None if comp in (C.I_RU, C.I_VT, C.I0) else cond
        assert joint_lt(comp, 0.0, 0.0, params, c) == 1.0
        assert joint_lt(comp, 0.01, 0.0, params, c) == single_lt(comp, 0.01, params, c)


def test_invalid_requests(params):
    with pytest.raises(ValueError):
        single_lt(C.I3, 0.01, params)
    with pytest.raises(ValueError):
        joint_lt(C.I_RU, -1.0, 0.0, params)
    with pytest.raises(ValueError):
        Conditioning(ServingEvent.cross(1, 0.5), 0.3)


def test_kernel_vectorizes_over_distance(params):
    k = RsuKernel(params)
    r = np.array([0.1, 0.3, 0.7])
    vec = k.e0_parts(r, 1e-3, 2e-3)
    for i, ri in enumerate(r):
        one = k.e0_parts(ri, 1e-3, 2e-3)
        for key in ("I0", "I3", "I4"):
            assert np.asarray(vec[key])[i] == pytest.approx(float(one[key]), rel=1e-12)
