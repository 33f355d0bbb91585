import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from plprelay.distributions import ServingEvent
from plprelay.geometry import (
    Line,
    NetworkRealization,
    NoRsuError,
    default_window_radius,
    dump_realization,
    edge_error_bound,
    line_tail_mean,
    load_realization,
    nearest_rsu,
    outside_lines_tail_mean,
    sample_batch,
    sample_realization,
    serving_event,
)


def _real(lines, rsus, vehs=None, radius=10.0):
    vehs = vehs if vehs is not None else [[] for _ in lines]
    return NetworkRealization(
        tuple(lines),
        tuple(np.array(a, dtype=float) for a in rsus),
        tuple(np.array(a, dtype=float) for a in vehs),
        radius,
    )


def test_line_parametrisation():
    own = Line(0.0, 0.0)
    np.testing.assert_allclose(own.point(3.0), [0.0, 3.0])
    ln = Line(2.0, 0.0)
    np.testing.assert_allclose(ln.point(0.0), [2.0, 0.0])
    assert ln.half_chord(10.0) == pytest.approx(math.sqrt(96.0))
    assert ln.perpendicular_distance((0.0, 0.0)) == pytest.approx(2.0)


@pytest.mark.parametrize("y, theta", [(-1.0, 0.0), (1.0, -0.1), (1.0, 2.0 * math.pi)])
def test_line_rejects_bad_coordinates(y, theta):
    with pytest.raises(ValueError):
        Line(y, theta)


def test_realization_invariants():
    with pytest.raises(ValueError):
        _real([Line(1.0, 0.0)], [[1.0]])
    with pytest.raises(ValueError):
        _real([Line(0.0, 0.0), Line(3.0, 0.0), Line(2.0, 1.0)], [[], [], []])
    with pytest.raises(ValueError):
        NetworkRealization((Line(0.0, 0.0),), (), (), 10.0)


def test_nearest_rsu_examples():
    real = _real([Line(0.0, 0.0)], [[3.0]])
    assert nearest_rsu(real).distance == pytest.approx(3.0)
    real = _real([Line(0.0, 0.0), Line(2.0, 0.0)], [[], [0.0]])
    near = nearest_rsu(real)
    assert (near.distance, near.line, near.abscissa) == (pytest.approx(2.0), 1, 0.0)
    with pytest.raises(NoRsuError):
        nearest_rsu(_real([Line(0.0, 0.0)], [[]]))


def test_nearest_rsu_tie_prefers_lower_line():
    real = _real([Line(0.0, 0.0), Line(1.0, 0.0)], [[-1.0], [0.0]])
    assert nearest_rsu(real).line == 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), x=st.floats(-2, 2), y=st.floats(-2, 2))
def test_nearest_rsu_matches_scan(params, seed, x, y):
    real = sample_realization(params, 4.0, seed)
    best = math.inf
    for ln, ts in zip(real.lines, real.rsus_per_line):
        for t in ts:
            p = ln.point(t)
            best = min(best, math.hypot(p[0] - x, p[1] - y))
    assert nearest_rsu(real, (x, y)).distance == pytest.approx(best, rel=1e-12)


def test_serving_event_examples():
    lines = [Line(0.0, 0.0), Line(0.5, 1.0), Line(1.5, 0.0)]
    assert serving_event(_real(lines, [[0.3], [], [0.0]])) == ServingEvent.own()
    ev = serving_event(_real(lines, [[5.0], [], [0.0]]))
    assert ev.kind == "en" and ev.n == 2 and ev.y == pytest.approx(1.5)
    ev = serving_event(_real(lines, [[5.0], [0.0], []]))
    assert ev.n == 1 and ev.y == pytest.approx(0.5)


def test_serving_event_ranks_from_the_point():
    # seen from (1, 0) the road at x = 1.5 is nearer than the one at x = -0.2
    lines = [Line(0.0, 0.0), Line(0.2, math.pi), Line(1.5, 0.0)]
    own = Line(1.0, 0.0)
    real = _real([lines[0], lines[1], own, lines[2]], [[], [], [], [0.0]])
    ev = serving_event(real, own.point(0.0), own_line=2)
    assert ev.n == 1 and ev.y == pytest.approx(0.5)


def test_dump_round_trip(params):
    real = sample_realization(params, 4.0, 11)
    back = load_realization(dump_realization(real))
    assert back.window_radius == real.window_radius
    assert back.lines == real.lines
    for a, b in zip(real.rsus_per_line + real.tx_vehicles_per_line, back.rsus_per_line + back.tx_vehicles_per_line):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("window 4\nline 0 0 0\nline 2 1 0\n", 3),
        ("window 4\nline 0 0 0\nrsu 0 x\n", 3),
        ("window 4\n# note\nbogus 1\n", 3),
        ("window\n", 1),
    ],
)
def test_load_reports_line_numbers(text, lineno):
    with pytest.raises(ValueError, match=f"line {lineno}:"):
        load_realization(text)


def test_load_requires_window():
    with pytest.raises(ValueError, match="window"):
        load_realization("line 0 0 0\n")


def test_sampling_is_deterministic(params):
    a = dump_realization(sample_realization(params, 4.0, 5))
    b = dump_realization(sample_realization(params, 4.0, 5))
    assert a == b
    assert a != dump_realization(sample_realization(params, 4.0, 6))


def test_batch_layout(params):
    b = sample_batch(params, 3.0, 50, 1)
    for i in range(b.n_drops):
        real = b.realization(i)
        ys = [ln.y for ln in real.lines]
        assert ys[0] == 0.0 and ys == sorted(ys) and max(ys) <= 3.0
        for ln, ts, vs in zip(real.lines, real.rsus_per_line, real.tx_vehicles_per_line):
            h = ln.half_chord(3.0)
            assert np.all(np.abs(ts) <= h) and np.all(np.abs(vs) <= h)
            assert np.all(np.diff(ts) >= 0)


def test_batch_point_counts_match_intensities(params):
    R, n = 10.0, 2000
    b = sample_batch(params, R, n, 3)
    other = np.bincount(b.line_drop, minlength=n) - 1
    mean_lines = 2.0 * params.rho * R
    assert abs(other.mean() - mean_lines) < 4.0 * math.sqrt(mean_lines / n)
    half = np.sqrt(R * R - b.line_y**2)
    for count, density in ((b.rsu_t.size, params.lambda_ru), (b.veh_t.size, params.lambda_vt)):
        expected = 2.0 * density * half.sum()
        assert abs(count - expected) < 4.0 * math.sqrt(expected)


def test_no_transmitting_vehicles_at_zero_density(params):
    b = sample_batch(params.with_(lambda_v=0.0), 4.0, 20, 2)
    assert b.veh_t.size == 0


def test_sample_batch_rejects_bad_input(params):
    with pytest.raises(ValueError):
        sample_batch(params, 0.0, 1, 0)
    with pytest.raises(ValueError):
        sample_batch(params, 4.0, 0, 0)


@pytest.mark.parametrize("y", [0.0, 0.3, 2.0, 3.9])
@pytest.mark.parametrize("eta", [3.0, 4.0])
def test_line_tail_mean(y, eta):
    R = 4.0
    h = math.sqrt(R * R - y * y)
    ref = 2.0 * integrate.quad(lambda t: (y * y + t * t) ** (-eta / 2), h, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert line_tail_mean(y, R, eta) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("eta", [3.0, 4.0, 5.5])
def test_outside_lines_tail_mean(eta):
    rho, R = 2.0, 4.0
    # a whole road at distance u contributes u^(1-eta) B((eta-1)/2, 1/2)
    beta = special.beta(0.5 * (eta - 1.0), 0.5)
    ref = 2.0 * rho * integrate.quad(lambda u: beta * u ** (1.0 - eta), R, np.inf, epsrel=1e-12)[0]
    assert outside_lines_tail_mean(rho, R, eta) == pytest.approx(ref, rel=1e-9)
    if eta == 4.0:
        assert outside_lines_tail_mean(rho, R, eta) == pytest.approx(rho * math.pi / (2.0 * R**2), rel=1e-12)


def test_window_radius_rule(params):
    R = default_window_radius(params)
    assert R == 4.0
    assert edge_error_bound(params, R) <= 1e-3
    assert edge_error_bound(params, 8.0) < edge_error_bound(params, 4.0)
    noiseless = params.with_(noise=0.0, threshold=10.0)
    R0 = default_window_radius(noiseless)
    assert edge_error_bound(noiseless, R0) <= 1e-3 or R0 == 200.0
