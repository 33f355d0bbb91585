import math
import warnings

import numpy as np
import pytest
from scipy import integrate as sci_integrate

from plprelay.coverage import (
    RELAY_FLOOR,
    CoverageError,
    pc1_a,
    pc1_ab,
    pc2_a,
    pc2_ab,
    relay_coverage,
    relay_link_coverage,
    scenario_a_coverage,
    xi1,
    xi2,
    xi3,
)
from plprelay.distributions import (
    pdf_serving_distance,
    pdf_yn,
    prob_e0_given_distance,
    prob_en_given_yn_distance,
    serving_distance_survival,
)
from plprelay.laplace import InterferenceComponent, single_lt
from plprelay.model import ModelParams, SinrScales, default_params, derive_scales
from plprelay.quadrature import QuadratureSpec

RANKS = 6


def _pieces(edges, order=24):
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(a + 0.5 * (b - a) * (x + 1))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _printed_order(p, r_min, own, cross):
    """Own-road integral in r plus sum over ranks of int dy int dr, road distance outermost.

    The inner serving distance is written as r = sqrt(y^2 + c^2), under which
    the chord law becomes 2 lam exp(-2 lam c) dc.
    """
    lam = p.lambda_ru
    own_val = sci_integrate.quad(
        lambda r: own(r) * 2 * lam * math.exp(-2 * lam * r), r_min, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200
    )[0]
    # the inner lower limit sqrt(r_min^2 - y^2) has a square-root kink at y = r_min
    edges = sorted({0.0, 0.05, 0.25, 1.0, 3.0, r_min, 0.5 * r_min, 0.9 * r_min})
    y, wy = _pieces(edges)
    t, wt = _pieces([0.0, 0.1, 0.5, 2.0, 8.0])
    total = own_val
    for n in range(1, RANKS + 1):
        for yi, wyi in zip(y, wy):
            c0 = math.sqrt(max(r_min * r_min - yi * yi, 0.0))
            c = c0 + t
            r = np.sqrt(yi * yi + c * c)
            vals = cross(r, yi, n) * 2 * lam * np.exp(-2 * lam * c)
            total += wyi * np.sum(wt * vals)
    return total


def _typical(p, r):
    s = p.mu * p.threshold * np.asarray(r, dtype=float) ** p.eta
    return s, s * p.nu / p.kappa


@pytest.fixture(scope="module")
def p():
    return default_params()


def test_direct_coverage_matches_printed_order_oracle(p):
    def own(r):
        return pc1_a(r, *_typical(p, r), p)

    def cross(r, y, n):
        return pc2_a(r, *_typical(p, r), y, p, n=n)

    ref = _printed_order(p, 0.0, own, cross)
    assert scenario_a_coverage(p).value == pytest.approx(ref, abs=2e-7)


def test_relay_joint_mass_matches_printed_order_oracle(p):
    r1 = 0.1
    s6 = p.mu * p.threshold * r1**p.eta
    s5 = s6 * p.kappa / p.nu

    def scales(r):
        s7, s8 = _typical(p, r)
        return SinrScales(0.0, 0.0, s5, s6, s7, s8)

    def own(r):
        return pc1_ab(r, scales(r), p)

    def cross(r, y, n):
        return pc2_ab(r, scales(r), y, p, n=n)

    ref = _printed_order(p, r1, own, cross)
    e1 = xi1(r1, p, full_output=True)
    assert e1.diagnostics["joint_mass"] == pytest.approx(ref, abs=2e-7)
    assert e1.value == pytest.approx(relay_link_coverage(r1, p) - ref, abs=2e-7)


def test_relay_leg_matches_survival_oracle(p):
    # P[rel, r0 < rb1, rb1 > r1] = S(r1) cov(0) - int_r1^inf cov(r0 > r) f_R(r) dr, by parts
    r1 = 0.1
    cov0 = scenario_a_coverage(p).value
    tail = sci_integrate.quad(
        lambda r: scenario_a_coverage(p, min_rb1=r).value * pdf_serving_distance(p, r),
        r1,
        np.inf,
        epsabs=1e-11,
        epsrel=1e-9,
        limit=100,
    )[0]
    ref = serving_distance_survival(p, r1) * cov0 - tail
    assert xi2(r1, p) == pytest.approx(ref, abs=1e-7)


def test_relay_leg_distance_constraint_at_vanishing_threshold():
    # all coverage events certain: P[r0 < rb1, rb1 > r1] = (1 - F(r1)^2) / 2 for i.i.d. r0, rb1.
    # Vehicles may sit arbitrarily close to the receiver, so outage vanishes only like T^(1/4).
    p = ModelParams(threshold=1e-40)
    r1 = 0.1
    F = 1.0 - serving_distance_survival(p, r1)
    assert xi2(r1, p) == pytest.approx(0.5 * (1 - F * F), abs=1e-6)


def test_direct_outage_complements_coverage(p):
    assert xi3(0.0, p) + scenario_a_coverage(p).value == pytest.approx(1.0, abs=1e-12)
    # the serving RSU within r1 always counts as not directly covered
    assert xi3(0.2, p) >= 1.0 - serving_distance_survival(p, 0.2)


@pytest.mark.parametrize("r1", [0.05, 0.1, 0.2])
def test_relay_terms_are_ordered(p, r1):
    assert 0.0 <= xi1(r1, p) <= xi3(r1, p) <= 1.0
    assert 0.0 <= xi2(r1, p) <= serving_distance_survival(p, r1)


def test_huge_threshold_limits():
    # an RSU closer than (kappa / (N T))^(1/4) still covers
    p = default_params().with_(threshold=1e40)
    assert scenario_a_coverage(p).value < 1e-8
    assert xi1(0.1, p) < 1e-8
    assert xi2(0.1, p) < 1e-8
    assert xi3(0.1, p) == pytest.approx(1.0, abs=1e-8)
    assert relay_coverage(0.1, p).value < 1e-8


def test_vanishing_rsu_density_leaves_vehicle_limited_relay_link():
    p = default_params().with_(lambda_ru=1e-6)
    r1 = 0.1
    s6 = p.mu * p.threshold * r1**p.eta
    expected = math.exp(-s6 * p.noise / p.nu) * single_lt(InterferenceComponent.I_VT, s6, p)
    assert relay_link_coverage(r1, p) == pytest.approx(expected, rel=1e-4)
    assert xi1(r1, p) == pytest.approx(expected, rel=1e-4)


def test_near_zero_relay_distance_makes_relay_hop_certain(p):
    # relay-epoch outage from RSUs near the receiver shrinks only linearly in r1
    r1 = 1e-5
    d = relay_coverage(r1, p).diagnostics
    assert d["xi1"] / d["xi3"] == pytest.approx(1.0, abs=1e-3)


def test_rank_truncation_is_stable(p):
    spec = QuadratureSpec()
    wider = QuadratureSpec(n_max=spec.n_max + 5)
    for fn in (xi1, xi2, xi3):
        assert abs(fn(0.1, p, wider) - fn(0.1, p, spec)) < 1e-4


def test_road_coupling_raises_coverage_over_product_form(p):
    road = scenario_a_coverage(p, coupling="road").value
    prod = scenario_a_coverage(p, coupling="product").value
    assert road > prod
    assert relay_link_coverage(0.1, p, "road") > relay_link_coverage(0.1, p, "product")
    with pytest.raises(ValueError):
        scenario_a_coverage(p, coupling="bogus")


def test_product_form_without_vehicles_equals_road_form():
    p = default_params().with_(lambda_v=0.0)
    assert scenario_a_coverage(p, coupling="product").value == pytest.approx(
        scenario_a_coverage(p, coupling="road").value, abs=1e-10
    )


def test_interference_free_integrands_reduce_to_event_probabilities():
    p = ModelParams(noise=0.0)
    r, y = 0.4, 0.15
    assert pc1_a(r, 0.0, 0.0, p) == pytest.approx(prob_e0_given_distance(p, r))
    assert pc2_a(r, 0.0, 0.0, y, p, n=2) == pytest.approx(pdf_yn(p, 2, y) * prob_en_given_yn_distance(p, 2, y, r))
    zero = SinrScales(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert pc1_ab(r, zero, p) == pytest.approx(prob_e0_given_distance(p, r))


def test_joint_integrand_bounded_by_direct_integrand(p):
    for rb1 in (0.15, 0.3, 0.6):
        sc = derive_scales(p, 0.05, 0.1, rb1)
        assert pc1_ab(rb1, sc, p) <= pc1_a(rb1, sc.s7, sc.s8, p)
        assert pc2_ab(rb1, sc, 0.1, p) <= pc2_a(rb1, sc.s7, sc.s8, 0.1, p)


def test_serving_rsu_interference_lowers_joint_term(p):
    sc = derive_scales(p, 0.05, 0.1, 0.2)
    assert pc1_ab(0.2, sc, p, include_server=True) < pc1_ab(0.2, sc, p, include_server=False)


def test_integrand_domain_checks(p):
    with pytest.raises(ValueError):
        pc2_a(0.1, 0.01, 0.0, 0.2, p)
    with pytest.raises(ValueError):
        pc1_ab(0.05, derive_scales(p, 0.05, 0.1, 0.2), p)
    with pytest.raises(ValueError):
        xi1(0.0, p)


def test_relay_coverage_rejects_certain_direct_link():
    p = ModelParams(threshold=1e-40)
    with pytest.raises(CoverageError):
        relay_coverage(1e-8, p)
    assert RELAY_FLOOR == 1e-6


def test_relay_coverage_diagnostics(p):
    est = relay_coverage(0.1, p)
    d = est.diagnostics
    assert est.value == pytest.approx(d["xi1"] * d["xi2"] / d["xi3"])
    assert sum(d["xi2_cases"]) == pytest.approx(d["xi2"])
    assert est.method == "analytic" and 0 < est.error < 1e-4


def test_coverage_decreases_with_threshold():
    vals = [scenario_a_coverage(default_params().with_(threshold=t)).value for t in (0.1, 1.0, 10.0)]
    assert vals[0] > vals[1] > vals[2]
