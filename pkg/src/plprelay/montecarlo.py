"""Monte Carlo estimation of coverage probabilities, transforms and distance laws.

Drops are simulated in fixed-size batches. Batch ``k`` of stream ``s`` draws
from ``SeedSequence(seed, spawn_key=(s, k))``, so results do not depend on the
number of worker processes. Each drop stores sufficient statistics (serving
distance, serving fading mark, interference sums per epoch and per RSU
category) from which every estimator is computed for any threshold or relay
distance without resampling.

Interference from outside the simulation window is replaced by its
conditional mean given the sampled roads (see
:func:`plprelay.geometry.edge_error_bound` for the residual).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import stats

from .coverage import CoverageEstimate
from .geometry import (
    default_window_radius,
    line_tail_mean,
    outside_lines_tail_mean,
    sample_batch,
)
from .laplace import Conditioning, InterferenceComponent
from .model import ModelParams

__all__ = [
    "McConfig",
    "McError",
    "DropSample",
    "RelayMcResult",
    "DistributionSamples",
    "simulate",
    "wilson_interval",
    "proportion_estimate",
    "mc_scenario_a",
    "mc_relay",
    "mc_laplace",
    "mc_distributions",
    "conditioning_bin",
    "write_drop_log",
]

N_CAT = 6  # RSU categories: I0, I1, I2, I3, I4, server
SERVER = 5
Z95 = 1.959963984540054


class McError(RuntimeError):
    pass


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    ``window_radius=None`` picks :func:`default_window_radius` for the
    parameters at hand. ``relay_leg`` selects how the relay vehicle's own
    link is simulated: ``"independent"`` (its own realization, so that its
    serving distance is independent of the typical vehicle's) or
    ``"shared"`` (the typical vehicle's realization, relay at (0, r1)).
    """

    drops: int = 200_000
    seed: int = 1
    window_radius: float | None = None
    batch: int = 2000
    workers: int = 1
    relay_leg: str = "independent"
    tail_correction: bool = True

    def __post_init__(self):
        if self.drops < 1:
            raise ValueError("drops must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.window_radius is not None and not self.window_radius > 0:
            raise ValueError("window_radius must be > 0")
        if self.relay_leg not in ("independent", "shared"):
            raise ValueError("relay_leg must be 'independent' or 'shared'")

    def radius(self, params: ModelParams) -> float:
        return self.window_radius if self.window_radius is not None else default_window_radius(params)

    def with_(self, **changes) -> "McConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass
class DropSample:
    """Per-drop statistics of one simulated stream.

    Interference sums ``comp_a``/``comp_b`` are unweighted (no transmit
    power) sums of ``g d^-eta`` per RSU category: own road, serving road,
    nearer roads, other roads cutting b(o, rb1), roads missing it, server.
    ``i_a``/``i_b`` are the weighted totals seen by the direct-link and
    relay-link receivers at the origin.
    """

    params: ModelParams
    window_radius: float
    rb1: np.ndarray
    srank: np.ndarray
    sy: np.ndarray
    g_serv: np.ndarray
    i_a: np.ndarray
    i_b: np.ndarray
    g_link: np.ndarray
    comp_a: np.ndarray
    comp_b: np.ndarray
    veh_a: np.ndarray
    veh_b: np.ndarray
    l0_nearest: np.ndarray
    road1_nearest: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    r0_shared: np.ndarray | None = None
    sinr_rel_shared: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.rb1.size

    @property
    def degenerate(self) -> np.ndarray:
        return ~np.isfinite(self.rb1)

    def sinr_a(self, params: ModelParams | None = None) -> np.ndarray:
        p = params or self.params
        with np.errstate(divide="ignore", invalid="ignore"):
            s = p.kappa * self.g_serv * self.rb1 ** (-p.eta)
        return np.where(self.degenerate, 0.0, s / (p.noise + self.i_a))

    def sinr_b(self, r1: float, params: ModelParams | None = None) -> np.ndarray:
        p = params or self.params
        return p.nu * self.g_link * r1 ** (-p.eta) / (p.noise + self.i_b)


_ARRAY_FIELDS = [f.name for f in fields(DropSample) if f.name not in ("params", "window_radius")]


def _seed(seed, stream, k):
    return np.random.SeedSequence(seed, spawn_key=(stream, k))


def _first_per_drop(drop, keys, n):
    """Index of the first element per drop after lexsorting by ``keys`` (last key primary)."""
    order = np.lexsort((*keys, drop))
    d = drop[order]
    first = np.full(n, -1, dtype=np.int64)
    if d.size:
        starts = np.flatnonzero(np.r_[True, d[1:] != d[:-1]])
        first[d[starts]] = order[starts]
    return first


def _tail_terms(params, R, b):
    """Per-line mean outside-window path-loss sums (unit density and mark)."""
    return line_tail_mean(b.line_y, R, params.eta), outside_lines_tail_mean(params.rho, R, params.eta)


def _simulate_batch(params: ModelParams, R: float, n: int, seed, tail: bool, shared_r1: float | None):
    rng = np.random.default_rng(seed)
    b = sample_batch(params, R, n, rng)
    eta, mu = params.eta, params.mu
    scale = 1.0 / mu

    # RSUs
    line = b.rsu_line
    drop = b.line_drop[line]
    rank = b.line_rank[line]
    y = b.line_y[line]
    t = b.rsu_t
    d2 = y * y + t * t
    g_a = rng.exponential(scale, t.size)
    g_b = rng.exponential(scale, t.size)
    g_link = rng.exponential(scale, n)

    srv = _first_per_drop(drop, (t, line, d2), n)
    has = srv >= 0
    rb1 = np.full(n, np.inf)
    rb1[has] = np.sqrt(d2[srv[has]])
    srank = np.full(n, -1, dtype=np.int64)
    srank[has] = rank[srv[has]]
    sy = np.zeros(n)
    sy[has] = y[srv[has]]
    g_serv = np.zeros(n)
    g_serv[has] = g_a[srv[has]]

    def category(rk, yy, dd):
        s = srank[dd]
        return np.where(
            rk == 0, 0,
            np.where(rk == s, 1, np.where(rk < s, 2, np.where(yy < rb1[dd], 3, 4))),
        )

    cat = category(rank, y, drop)
    cat[srv[has]] = SERVER
    pl = d2 ** (-0.5 * eta)
    comp_a = np.bincount(drop * N_CAT + cat, weights=g_a * pl, minlength=n * N_CAT).reshape(n, N_CAT)
    comp_b = np.bincount(drop * N_CAT + cat, weights=g_b * pl, minlength=n * N_CAT).reshape(n, N_CAT)

    # transmitting vehicles
    vline = b.veh_line
    vdrop = b.line_drop[vline]
    vy = b.line_y[vline]
    vt = b.veh_t
    vpl = (vy * vy + vt * vt) ** (-0.5 * eta)
    h_a = rng.exponential(scale, vt.size)
    h_b = rng.exponential(scale, vt.size)
    veh_a = np.bincount(vdrop, weights=h_a * vpl, minlength=n)
    veh_b = np.bincount(vdrop, weights=h_b * vpl, minlength=n)

    if tail:
        per_line, outside = _tail_terms(params, R, b)
        lcat = category(b.line_rank, b.line_y, b.line_drop)
        lcat = np.where(b.line_rank == srank[b.line_drop], np.where(b.line_rank == 0, 0, 1), lcat)
        rsu_tail = np.bincount(
            b.line_drop * N_CAT + lcat, weights=per_line, minlength=n * N_CAT
        ).reshape(n, N_CAT)
        rsu_tail[:, 4] += outside
        rsu_tail *= params.lambda_ru * scale
        veh_tail = (np.bincount(b.line_drop, weights=per_line, minlength=n) + outside) * params.lambda_vt * scale
        comp_a += rsu_tail
        comp_b += rsu_tail
        veh_a += veh_tail
        veh_b += veh_tail

    k, nu = params.kappa, params.nu
    i_a = k * comp_a[:, :SERVER].sum(axis=1) + nu * veh_a
    i_b = k * comp_b.sum(axis=1) + nu * veh_b

    # per-road nearest distances for distribution checks
    l0 = rank == 0
    f0 = _first_per_drop(drop[l0], (np.abs(t[l0]),), n)
    l0_nearest = np.where(f0 >= 0, np.abs(t[l0])[np.maximum(f0, 0)], np.inf)
    r1m = rank == 1
    f1 = _first_per_drop(drop[r1m], (d2[r1m],), n)
    road1_nearest = np.where(f1 >= 0, np.sqrt(d2[r1m])[np.maximum(f1, 0)], np.inf)
    y1 = np.full(n, np.inf)
    y2 = np.full(n, np.inf)
    y1[b.line_drop[b.line_rank == 1]] = b.line_y[b.line_rank == 1]
    y2[b.line_drop[b.line_rank == 2]] = b.line_y[b.line_rank == 2]

    out = dict(
        rb1=rb1, srank=srank, sy=sy, g_serv=g_serv, i_a=i_a, i_b=i_b, g_link=g_link,
        comp_a=comp_a, comp_b=comp_b, veh_a=veh_a, veh_b=veh_b,
        l0_nearest=l0_nearest, road1_nearest=road1_nearest, y1=y1, y2=y2,
    )

    if shared_r1 is not None:
        out.update(_shared_relay(params, b, rng, shared_r1, drop, line, t, vdrop, vline, vt, n, tail, R))
    return out


def _xy(b, line, t):
    y = b.line_y[line]
    th = b.line_theta[line]
    c, s = np.cos(th), np.sin(th)
    return y * c - t * s, y * s + t * c


def _shared_relay(params, b, rng, r1, drop, line, t, vdrop, vline, vt, n, tail, R):
    """Relay vehicle at (0, r1) in the same realization, fresh fading epoch."""
    eta, scale = params.eta, 1.0 / params.mu
    x, yy = _xy(b, line, t)
    d2 = x * x + (yy - r1) ** 2
    g = rng.exponential(scale, t.size)
    vx, vyy = _xy(b, vline, vt)
    h = rng.exponential(scale, vt.size)
    srv = _first_per_drop(drop, (t, line, d2), n)
    has = srv >= 0
    p = params.kappa * g * d2 ** (-0.5 * eta)
    tot = np.bincount(drop, weights=p, minlength=n)
    veh = params.nu * np.bincount(vdrop, weights=h * (vx * vx + (vyy - r1) ** 2) ** (-0.5 * eta), minlength=n)
    sig = np.zeros(n)
    sig[has] = p[srv[has]]
    extra = 0.0
    if tail:
        per_line, outside = _tail_terms(params, R, b)
        lines = np.bincount(b.line_drop, weights=per_line, minlength=n) + outside
        extra = lines * (params.kappa * params.lambda_ru + params.nu * params.lambda_vt) * scale
    r0 = np.full(n, np.inf)
    r0[has] = np.sqrt(d2[srv[has]])
    return {"r0_shared": r0, "sinr_rel_shared": sig / (params.noise + tot - sig + veh + extra)}


def _run_batch(job):
    params, R, n, seed, tail, shared_r1 = job
    return _simulate_batch(params, R, n, seed, tail, shared_r1)


def simulate(params: ModelParams, cfg: McConfig, stream: int = 0, shared_r1: float | None = None) -> DropSample:
    """Simulate ``cfg.drops`` drops of one stream and collect per-drop statistics."""
    R = cfg.radius(params)
    jobs = []
    for k, start in enumerate(range(0, cfg.drops, cfg.batch)):
        n = min(cfg.batch, cfg.drops - start)
        jobs.append((params, R, n, _seed(cfg.seed, stream, k), cfg.tail_correction, shared_r1))
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            parts = list(ex.map(_run_batch, jobs))
    else:
        parts = [_run_batch(j) for j in jobs]
    merged = {}
    for name in _ARRAY_FIELDS:
        if parts[0].get(name) is None:
            merged[name] = None
        else:
            merged[name] = np.concatenate([p[name] for p in parts])
    return DropSample(params=params, window_radius=R, **merged)


# ---------------------------------------------------------------------------
# estimators


def wilson_interval(k: int, n: int, z: float = Z95):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be > 0")
    p = k / n
    den = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    # the bounds are exactly 0 and 1 at the edges; rounding would leave ~1e-17
    lo = 0.0 if k <= 0 else max(centre - half, 0.0)
    hi = 1.0 if k >= n else min(centre + half, 1.0)
    return lo, hi


def proportion_estimate(k: int, n: int, **diagnostics) -> CoverageEstimate:
    lo, hi = wilson_interval(int(k), int(n))
    diag = {"count": int(k), "drops": int(n), "wilson": (lo, hi)}
    diag.update(diagnostics)
    return CoverageEstimate(k / n, "monte-carlo", 0.5 * (hi - lo), diag)


def _compatible(sample: DropSample, params: ModelParams):
    if sample.params.with_(threshold=params.threshold) != params:
        raise ValueError("sample was simulated with different parameters")


def _get_sample(params, cfg, sample, stream=0):
    if sample is None:
        return simulate(params, cfg, stream)
    _compatible(sample, params)
    return sample


def _check_degenerate(s: DropSample):
    bad = int(s.degenerate.sum())
    if bad == s.n:
        raise McError("no drop has an RSU inside the window; enlarge window_radius")
    return bad


def mc_scenario_a(
    params: ModelParams, cfg: McConfig, min_rb1: float = 0.0, sample: DropSample | None = None
) -> CoverageEstimate:
    """Fraction of drops with SINR_A > T and serving distance above ``min_rb1``."""
    s = _get_sample(params, cfg, sample)
    bad = _check_degenerate(s)
    covered = (s.sinr_a(params) > params.threshold) & (s.rb1 > min_rb1)
    return proportion_estimate(int(covered.sum()), s.n, no_rsu_drops=bad, window_radius=s.window_radius)


@dataclass
class RelayMcResult:
    """Monte Carlo counterparts of the relay-coverage factors.

    ``p_joint_b_not_a``: SINR_B > T and not (SINR_A > T with rb1 > r1).
    ``p_not_a``: not (SINR_A > T with rb1 > r1).
    ``p_rel_and_constraint``: SINR_rel > T, r0 < rb1 and rb1 > r1.
    ``p_pipeline``: p_joint_b_not_a / p_not_a * p_rel_and_constraint.
    """

    p_joint_b_not_a: CoverageEstimate
    p_not_a: CoverageEstimate
    p_rel_and_constraint: CoverageEstimate
    p_pipeline: CoverageEstimate
    accepted: int
    rejected: int
    diagnostics: dict = field(default_factory=dict)


def mc_relay(
    params: ModelParams,
    cfg: McConfig,
    r1: float,
    sample: DropSample | None = None,
    relay_sample: DropSample | None = None,
) -> RelayMcResult:
    """Estimate the relay-coverage factors at relay distance r1.

    Drops with rb1 <= r1 never count as direct coverage (relaying is then
    used regardless of the direct link); they are reported as ``rejected``
    and the estimates conditioned on rb1 > r1 are added to the diagnostics.
    """
    if not r1 > 0:
        raise ValueError("r1 must be > 0")
    shared = cfg.relay_leg == "shared"
    if sample is None:
        sample = simulate(params, cfg, 0, shared_r1=r1 if shared else None)
    _compatible(sample, params)
    _check_degenerate(sample)
    T = params.threshold
    n = sample.n
    far = sample.rb1 > r1
    a = (sample.sinr_a(params) > T) & far
    b = sample.sinr_b(r1, params) > T
    not_a = ~a
    joint = b & not_a

    if shared:
        if sample.r0_shared is None:
            raise ValueError("shared relay leg needs a sample simulated with shared_r1")
        r0, rel_ok = sample.r0_shared, sample.sinr_rel_shared > T
    else:
        rs = relay_sample if relay_sample is not None else simulate(params, cfg, 1)
        _compatible(rs, params)
        if rs.n != n:
            raise ValueError("relay sample must have as many drops as the main sample")
        r0, rel_ok = rs.rb1, rs.sinr_a(params) > T
    rel = rel_ok & (r0 < sample.rb1) & far

    k_joint, k_not_a, k_rel = int(joint.sum()), int(not_a.sum()), int(rel.sum())
    if k_not_a == 0:
        raise McError("conditioning population empty: the direct link never fails")
    p_joint = proportion_estimate(k_joint, n)
    p_not_a = proportion_estimate(k_not_a, n)
    p_rel = proportion_estimate(k_rel, n)
    q = k_joint / k_not_a
    c = k_rel / n
    var = c * c * q * (1 - q) / k_not_a + q * q * c * (1 - c) / n
    pipe = CoverageEstimate(q * c, "monte-carlo", Z95 * math.sqrt(var), {"conditional_b": q})

    acc = int(far.sum())
    diag = {"relay_leg": cfg.relay_leg, "window_radius": sample.window_radius}
    if acc:
        not_a_far = not_a & far
        diag.update(
            p_not_a_given_far=float(not_a_far.sum() / acc),
            p_joint_given_far=float((b & not_a_far).sum() / acc),
        )
    return RelayMcResult(p_joint, p_not_a, p_rel, pipe, acc, n - acc, diag)


def conditioning_bin(value: float):
    """Half-open bin of width max(0.02 km, 2% of the value) centred on ``value``."""
    w = max(0.02, 0.02 * value)
    return value - 0.5 * w, value + 0.5 * w


def _component_sums(s: DropSample, component: InterferenceComponent, conditioned: bool):
    C = InterferenceComponent
    if component is C.I_VT:
        return s.veh_a, s.veh_b
    if not conditioned:
        if component is C.I_RU:
            return s.comp_a.sum(axis=1), s.comp_b.sum(axis=1)
        if component is C.I0:
            own_srv = s.srank == 0
            return (
                s.comp_a[:, 0] + np.where(own_srv, s.comp_a[:, SERVER], 0.0),
                s.comp_b[:, 0] + np.where(own_srv, s.comp_b[:, SERVER], 0.0),
            )
        raise ValueError(f"{component.value} is only defined under a serving-event conditioning")
    if component is C.I_RU:
        return s.comp_a[:, :SERVER].sum(axis=1), s.comp_b[:, :SERVER].sum(axis=1)
    j = {C.I0: 0, C.I1: 1, C.I2: 2, C.I3: 3, C.I4: 4}[component]
    return s.comp_a[:, j], s.comp_b[:, j]


def mc_laplace(
    params: ModelParams,
    cfg: McConfig,
    component,
    s_a: float,
    s_b: float = 0.0,
    conditioning: Conditioning | None = None,
    sample: DropSample | None = None,
    min_acceptance: float = 1e-3,
) -> CoverageEstimate:
    """Empirical ``E[exp(-s_a I^(1) - s_b I^(2))]`` with independent fading per epoch.

    Under ``conditioning`` only drops with the requested serving event and a
    serving distance (and, for cross-road events, road distance) in the bin
    of :func:`conditioning_bin` are used. The accepted serving distances and
    road distances are returned in the diagnostics so that analytic values
    can be averaged over the same bin population.
    """
    component = InterferenceComponent(component)
    if s_a < 0 or s_b < 0:
        raise ValueError("Laplace arguments must be >= 0")
    s = _get_sample(params, cfg, sample)
    _check_degenerate(s)
    if conditioning is None:
        mask = np.ones(s.n, dtype=bool)
    else:
        lo, hi = conditioning_bin(conditioning.rb1)
        mask = (s.rb1 >= lo) & (s.rb1 < hi)
        ev = conditioning.event
        if ev.is_own:
            mask &= s.srank == 0
        else:
            ylo, yhi = conditioning_bin(ev.y)
            mask &= (s.srank == ev.n) & (s.sy >= ylo) & (s.sy < yhi)
    acc = int(mask.sum())
    if acc < max(1, min_acceptance * s.n):
        raise McError(
            f"conditioning accepted {acc} of {s.n} drops (< {min_acceptance:g}); use coarser bins or more drops"
        )
    if s_a == 0 and s_b == 0:
        return CoverageEstimate(1.0, "monte-carlo", 0.0, {"accepted": acc, "rejected": s.n - acc})
    xa, xb = _component_sums(s, component, conditioning is not None)
    vals = np.exp(-s_a * xa[mask] - s_b * xb[mask])
    half = Z95 * float(vals.std(ddof=1)) / math.sqrt(acc) if acc > 1 else 1.0
    diag = {"accepted": acc, "rejected": s.n - acc}
    if conditioning is not None:
        diag["rb1"] = s.rb1[mask]
        diag["y"] = s.sy[mask]
    return CoverageEstimate(float(vals.mean()), "monte-carlo", half, diag)


@dataclass
class DistributionSamples:
    """Samples for goodness-of-fit checks of the distance laws.

    ``y1``, ``y2``: distances to the nearest and second-nearest other road.
    ``own_road_nearest``: nearest RSU on the typical vehicle's road.
    ``road1_nearest``, ``road1_y``: nearest RSU on the nearest other road and
    that road's distance. ``serving_rank`` (0 = own road), ``serving_distance``
    and ``serving_y`` describe the overall nearest RSU.
    """

    y1: np.ndarray
    y2: np.ndarray
    own_road_nearest: np.ndarray
    road1_nearest: np.ndarray
    road1_y: np.ndarray
    serving_rank: np.ndarray
    serving_distance: np.ndarray
    serving_y: np.ndarray
    window_radius: float

    def event_frequencies(self, max_rank: int = 5) -> dict:
        n = self.serving_rank.size
        out = {"e0": float(np.mean(self.serving_rank == 0))}
        for k in range(1, max_rank + 1):
            out[f"e{k}"] = float(np.mean(self.serving_rank == k))
        out["rest"] = float(np.mean((self.serving_rank > max_rank) | (self.serving_rank < 0)))
        out["drops"] = n
        return out


def mc_distributions(params: ModelParams, cfg: McConfig, sample: DropSample | None = None) -> DistributionSamples:
    """Distance samples from simulated drops; windowed values beyond R are dropped."""
    s = _get_sample(params, cfg, sample)
    _check_degenerate(s)
    fin = lambda v: v[np.isfinite(v)]  # noqa: E731
    ok1 = np.isfinite(s.road1_nearest)
    return DistributionSamples(
        y1=fin(s.y1),
        y2=fin(s.y2),
        own_road_nearest=fin(s.l0_nearest),
        road1_nearest=s.road1_nearest[ok1],
        road1_y=s.y1[ok1],
        serving_rank=s.srank.copy(),
        serving_distance=s.rb1.copy(),
        serving_y=s.sy.copy(),
        window_radius=s.window_radius,
    )


def write_drop_log(sample: DropSample, fh, r1: float | None = None) -> None:
    """Write one row per drop as whitespace-separated columns with a header."""
    cols = ["rb1", "serving_rank", "serving_y", "sinr_a"]
    data = [sample.rb1, sample.srank, sample.sy, sample.sinr_a()]
    if r1 is not None:
        cols.append("sinr_b")
        data.append(sample.sinr_b(r1))
    fh.write(" ".join(cols) + "\n")
    for row in zip(*data):
        fh.write(" ".join(repr(float(v)) if not isinstance(v, (np.integer, int)) else str(int(v)) for v in row) + "\n")


def ks_test(samples, cdf) -> float:
    """Kolmogorov-Smirnov p-value of ``samples`` against a CDF callable."""
    return float(stats.kstest(np.asarray(samples, dtype=float), cdf).pvalue)
