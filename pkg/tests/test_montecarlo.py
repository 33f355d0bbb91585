import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from plprelay.coverage import scenario_a_coverage
from plprelay.distributions import ServingEvent
from plprelay.laplace import Conditioning, InterferenceComponent, single_lt
from plprelay.montecarlo import (
    McConfig,
    McError,
    conditioning_bin,
    ks_test,
    mc_distributions,
    mc_laplace,
    mc_relay,
    mc_scenario_a,
    proportion_estimate,
    simulate,
    wilson_interval,
    write_drop_log,
)

TINY = McConfig(drops=3000, seed=3, batch=500)


@pytest.fixture(scope="module")
def relay_sample(params, small_cfg):
    return simulate(params, small_cfg, 1)


def _same(a, b):
    for name in ("rb1", "srank", "sy", "g_serv", "i_a", "i_b", "g_link", "comp_a", "veh_b", "y1"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_simulation_is_reproducible(params):
    _same(simulate(params, TINY), simulate(params, TINY))


def test_worker_count_does_not_change_results(params):
    _same(simulate(params, TINY), simulate(params, TINY.with_(workers=3)))


def test_streams_and_seeds_differ(params):
    a = simulate(params, TINY)
    assert not np.array_equal(a.rb1, simulate(params, TINY, 1).rb1)
    assert not np.array_equal(a.rb1, simulate(params, TINY.with_(seed=4)).rb1)


@pytest.mark.parametrize(
    "kw",
    [dict(drops=0), dict(batch=0), dict(workers=0), dict(seed=-1), dict(window_radius=0.0), dict(relay_leg="x")],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        McConfig(**kw)


@given(k=st.integers(0, 500), extra=st.integers(0, 500))
def test_wilson_interval_properties(k, extra):
    n = k + extra
    if n == 0:
        return
    lo, hi = wilson_interval(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0


def test_wilson_edges_and_shrinkage():
    assert wilson_interval(0, 100)[0] == 0.0
    assert wilson_interval(100, 100)[1] == 1.0
    with pytest.raises(ValueError):
        wilson_interval(0, 0)
    halves = [proportion_estimate(n // 2, n).error for n in (1000, 4000, 16000)]
    for a, b in zip(halves, halves[1:]):
        assert a / b == pytest.approx(2.0, rel=0.01)


def test_scenario_a_limits(params, small_sample):
    assert mc_scenario_a(params.with_(threshold=1e40), None, sample=small_sample).value == 0.0
    assert mc_scenario_a(params.with_(threshold=1e-40), None, sample=small_sample).value > 0.99


def test_scenario_a_matches_analytic(params, small_sample):
    mc = mc_scenario_a(params, None, sample=small_sample)
    ref = scenario_a_coverage(params)
    assert abs(mc.value - ref.value) <= 3.0 * mc.error + 0.01


def test_sample_reused_across_thresholds_only(params, small_sample):
    with pytest.raises(ValueError):
        mc_scenario_a(params.with_(rho=1.0), None, sample=small_sample)


@pytest.mark.parametrize("component, s", [("I_ru", 1e-3), ("I_vt", 5e-3), ("I0", 2e-2)])
def test_unconditioned_transforms_match_analytic(params, small_sample, component, s):
    mc = mc_laplace(params, None, component, s, sample=small_sample)
    ref = single_lt(InterferenceComponent(component), s, params)
    assert abs(mc.value - ref) <= 3.0 * mc.error + 0.01


def test_zero_argument_transform_is_one(params, small_sample):
    assert mc_laplace(params, None, "I_ru", 0.0, sample=small_sample).value == 1.0
    cond = Conditioning(ServingEvent.own(), 0.2)
    assert mc_laplace(params, None, "I0", 0.0, 0.0, cond, sample=small_sample).value == 1.0


def test_laplace_rejects_thin_bins_and_bad_arguments(params, small_sample):
    with pytest.raises(McError):
        mc_laplace(params, None, "I0", 1e-3, conditioning=Conditioning(ServingEvent.own(), 3.9), sample=small_sample)
    with pytest.raises(ValueError):
        mc_laplace(params, None, "I_ru", -1.0, sample=small_sample)
    with pytest.raises(ValueError):
        mc_laplace(params, None, "I3", 1e-3, sample=small_sample)


def test_conditioned_laplace_reports_bin_population(params, small_sample):
    cond = Conditioning(ServingEvent.own(), 0.2)
    est = mc_laplace(params, None, "I0", 1e-2, 1e-2, cond, sample=small_sample)
    lo, hi = conditioning_bin(0.2)
    rb1 = est.diagnostics["rb1"]
    assert rb1.size == est.diagnostics["accepted"]
    assert np.all((rb1 >= lo) & (rb1 < hi))
    assert 0.0 < est.value < 1.0


def test_relay_counts_and_consistency(params, small_sample, relay_sample, small_cfg):
    res = mc_relay(params, small_cfg, 0.1, sample=small_sample, relay_sample=relay_sample)
    assert res.accepted + res.rejected == small_sample.n
    assert res.accepted == int(np.sum(small_sample.rb1 > 0.1))
    assert res.p_joint_b_not_a.value <= res.p_not_a.value
    q = res.p_joint_b_not_a.value / res.p_not_a.value
    assert res.p_pipeline.value == pytest.approx(q * res.p_rel_and_constraint.value)
    # p_not_a is the complement of direct coverage beyond r1
    assert res.p_not_a.value == pytest.approx(
        1.0 - mc_scenario_a(params, None, min_rb1=0.1, sample=small_sample).value
    )


def test_relay_argument_checks(params, small_sample, relay_sample, small_cfg):
    with pytest.raises(ValueError):
        mc_relay(params, small_cfg, 0.0, sample=small_sample, relay_sample=relay_sample)
    with pytest.raises(ValueError):
        mc_relay(params, small_cfg.with_(relay_leg="shared"), 0.1, sample=small_sample)
    short = simulate(params, TINY, 1)
    with pytest.raises(ValueError):
        mc_relay(params, small_cfg, 0.1, sample=small_sample, relay_sample=short)


def test_shared_relay_leg(params):
    cfg = TINY.with_(relay_leg="shared")
    res = mc_relay(params, cfg, 0.1)
    assert res.accepted + res.rejected == cfg.drops
    assert 0.0 <= res.p_pipeline.value <= 1.0


def test_event_frequencies_partition(params, small_sample):
    freq = mc_distributions(params, None, sample=small_sample).event_frequencies()
    assert freq["drops"] == small_sample.n
    assert sum(v for k, v in freq.items() if k != "drops") == pytest.approx(1.0)


def test_drop_log(small_sample):
    fh = io.StringIO()
    write_drop_log(small_sample, fh, r1=0.1)
    rows = fh.getvalue().splitlines()
    assert rows[0].split() == ["rb1", "serving_rank", "serving_y", "sinr_a", "sinr_b"]
    assert len(rows) == small_sample.n + 1
    first = rows[1].split()
    assert float(first[0]) == small_sample.rb1[0]
    assert int(first[1]) == small_sample.srank[0]


def test_ks_helper():
    rng = np.random.default_rng(0)
    assert ks_test(rng.random(5000), stats.uniform.cdf) > 0.01
    assert ks_test(rng.random(5000) ** 2, stats.uniform.cdf) < 1e-6


@pytest.mark.slow
def test_window_edge_correction_is_small(params):
    cfg = McConfig(drops=10000, seed=9, batch=2000)
    a = mc_scenario_a(params, cfg.with_(window_radius=4.0))
    b = mc_scenario_a(params, cfg.with_(window_radius=8.0))
    assert abs(a.value - b.value) <= 3.0 * math.hypot(a.error, b.error)
