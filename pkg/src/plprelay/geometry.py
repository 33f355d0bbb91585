"""Sampling of road layouts and per-road point processes seen from a typical vehicle.

The typical vehicle sits at the origin on road ``L0`` (perpendicular distance
0, direction along the y axis). Other roads are a Poisson line process: the
perpendicular distances form a Poisson process of intensity ``2 rho`` and the
foot angles are uniform. Each road carries independent Poisson processes of
RSUs (``lambda_ru``) and transmitting vehicles (``p1 lambda_v``).

A road with foot distance ``y`` and angle ``theta`` is the set of points
``y (cos theta, sin theta) + t (-sin theta, cos theta)``; ``t`` is the signed
abscissa. Only the chord of each road inside the disk ``b(o, R)`` is sampled.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .distributions import ServingEvent
from .model import ModelParams

__all__ = [
    "Line",
    "NetworkRealization",
    "RealizationBatch",
    "NearestRsu",
    "NoRsuError",
    "make_rng",
    "sample_batch",
    "sample_realization",
    "nearest_rsu",
    "serving_event",
    "dump_realization",
    "load_realization",
    "line_tail_mean",
    "outside_lines_tail_mean",
    "tail_interference_mean",
    "edge_error_bound",
    "default_window_radius",
]


class NoRsuError(LookupError):
    """No RSU inside the simulation window."""


@dataclass(frozen=True)
class Line:
    y: float
    theta: float

    def __post_init__(self):
        if not self.y >= 0:
            raise ValueError("y must be >= 0")
        if not 0.0 <= self.theta < 2.0 * math.pi:
            raise ValueError("theta must lie in [0, 2 pi)")

    @property
    def normal(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    @property
    def direction(self) -> np.ndarray:
        return np.array([-math.sin(self.theta), math.cos(self.theta)])

    def point(self, t) -> np.ndarray:
        """Cartesian coordinates of abscissae ``t``, shape (..., 2)."""
        t = np.asarray(t, dtype=float)
        return self.y * self.normal + t[..., None] * self.direction

    def half_chord(self, radius: float) -> float:
        return math.sqrt(max(radius * radius - self.y * self.y, 0.0))

    def perpendicular_distance(self, p) -> float:
        return abs(float(np.dot(p, self.normal)) - self.y)

    def foot_abscissa(self, p) -> float:
        """Abscissa of the orthogonal projection of ``p`` onto the line."""
        return float(np.dot(p, self.direction))


@dataclass(frozen=True, eq=False)
class NetworkRealization:
    """One sampled network; ``lines[0]`` is the typical vehicle's road."""

    lines: tuple
    rsus_per_line: tuple
    tx_vehicles_per_line: tuple
    window_radius: float

    def __post_init__(self):
        if not self.lines or self.lines[0].y != 0:
            raise ValueError("lines[0] must be the road through the origin")
        if not (len(self.lines) == len(self.rsus_per_line) == len(self.tx_vehicles_per_line)):
            raise ValueError("one RSU list and one vehicle list per line")
        ys = [ln.y for ln in self.lines]
        if any(b < a for a, b in zip(ys, ys[1:])):
            raise ValueError("lines must be sorted by perpendicular distance")

    @property
    def n_rsus(self) -> int:
        return sum(len(a) for a in self.rsus_per_line)

    def rsu_points(self):
        """(line index, abscissa, xy) of all RSUs, line-major."""
        return _flat_points(self.lines, self.rsus_per_line)

    def vehicle_points(self):
        return _flat_points(self.lines, self.tx_vehicles_per_line)


def _flat_points(lines, per_line):
    idx = np.concatenate([np.full(len(a), i, dtype=int) for i, a in enumerate(per_line)] or [np.zeros(0, int)])
    t = np.concatenate([np.asarray(a, dtype=float) for a in per_line] or [np.zeros(0)])
    xy = np.zeros((t.size, 2))
    for i, ln in enumerate(lines):
        sel = idx == i
        if sel.any():
            xy[sel] = ln.point(t[sel])
    return idx, t, xy


@dataclass
class RealizationBatch:
    """Many independent realizations stored as flat arrays.

    Lines are grouped by drop and sorted by ``y`` within a drop (the road
    through the origin first). Points are grouped by line and sorted by
    abscissa within a line.
    """

    n_drops: int
    window_radius: float
    line_drop: np.ndarray
    line_rank: np.ndarray
    line_y: np.ndarray
    line_theta: np.ndarray
    rsu_line: np.ndarray
    rsu_t: np.ndarray
    veh_line: np.ndarray
    veh_t: np.ndarray

    def realization(self, i: int) -> NetworkRealization:
        sel = np.flatnonzero(self.line_drop == i)
        lines = tuple(Line(float(self.line_y[j]), float(self.line_theta[j])) for j in sel)
        rsus = tuple(self.rsu_t[self.rsu_line == j].copy() for j in sel)
        vehs = tuple(self.veh_t[self.veh_line == j].copy() for j in sel)
        return NetworkRealization(lines, rsus, vehs, self.window_radius)


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _points_on_lines(rng, density, half, n_lines):
    counts = rng.poisson(2.0 * density * half) if density > 0 else np.zeros(n_lines, dtype=int)
    line = np.repeat(np.arange(n_lines), counts)
    t = (2.0 * rng.random(line.size) - 1.0) * half[line]
    order = np.lexsort((t, line))
    return line[order], t[order]


def sample_batch(params: ModelParams, window_radius: float, n_drops: int, seed) -> RealizationBatch:
    """Sample ``n_drops`` independent realizations inside ``b(o, window_radius)``."""
    if not window_radius > 0:
        raise ValueError("window_radius must be > 0")
    if n_drops < 1:
        raise ValueError("n_drops must be >= 1")
    rng = make_rng(seed)
    R = float(window_radius)
    n_other = rng.poisson(2.0 * params.rho * R, n_drops)
    drop_other = np.repeat(np.arange(n_drops), n_other)
    y_other = R * rng.random(drop_other.size)
    th_other = 2.0 * math.pi * rng.random(drop_other.size)

    drop = np.concatenate([np.arange(n_drops), drop_other])
    y = np.concatenate([np.zeros(n_drops), y_other])
    theta = np.concatenate([np.zeros(n_drops), th_other])
    order = np.lexsort((y, drop))
    drop, y, theta = drop[order], y[order], theta[order]
    start = np.searchsorted(drop, np.arange(n_drops))
    rank = np.arange(drop.size) - start[drop]

    half = np.sqrt(np.maximum(R * R - y * y, 0.0))
    rsu_line, rsu_t = _points_on_lines(rng, params.lambda_ru, half, drop.size)
    veh_line, veh_t = _points_on_lines(rng, params.lambda_vt, half, drop.size)
    return RealizationBatch(n_drops, R, drop, rank, y, theta, rsu_line, rsu_t, veh_line, veh_t)


def sample_realization(params: ModelParams, window_radius: float, seed) -> NetworkRealization:
    """One realization; identical seeds give identical realizations."""
    return sample_batch(params, window_radius, 1, seed).realization(0)


@dataclass(frozen=True)
class NearestRsu:
    distance: float
    line: int
    abscissa: float


def nearest_rsu(real: NetworkRealization, from_point=(0.0, 0.0)) -> NearestRsu:
    """Nearest RSU to ``from_point``; ties go to the lower line index, then abscissa."""
    idx, t, xy = real.rsu_points()
    if t.size == 0:
        raise NoRsuError("no RSU in the simulation window; enlarge window_radius")
    d2 = np.sum((xy - np.asarray(from_point, dtype=float)) ** 2, axis=1)
    j = np.lexsort((t, idx, d2))[0]
    return NearestRsu(math.sqrt(d2[j]), int(idx[j]), float(t[j]))


def serving_event(real: NetworkRealization, from_point=(0.0, 0.0), own_line: int = 0) -> ServingEvent:
    """Which road hosts the nearest RSU of ``from_point`` (a point on ``own_line``).

    Other roads are ranked by their perpendicular distance from the point.
    """
    near = nearest_rsu(real, from_point)
    if near.line == own_line:
        return ServingEvent.own()
    p = np.asarray(from_point, dtype=float)
    dists = [(ln.perpendicular_distance(p), i) for i, ln in enumerate(real.lines) if i != own_line]
    dists.sort()
    for rank, (d, i) in enumerate(dists, start=1):
        if i == near.line:
            return ServingEvent.cross(rank, d)
    raise AssertionError("serving line missing from ranking")


# ---------------------------------------------------------------------------
# text dump


def dump_realization(real: NetworkRealization, fh=None) -> str | None:
    """Write a realization as one record per line; returns the text if ``fh`` is None.

    Records: ``window R``, ``line i y theta``, ``rsu i t``, ``veh i t``.
    """
    out = io.StringIO() if fh is None else fh
    out.write("# plprelay realization\n")
    out.write(f"window {real.window_radius!r}\n")
    for i, ln in enumerate(real.lines):
        out.write(f"line {i} {ln.y!r} {ln.theta!r}\n")
    for kind, per_line in (("rsu", real.rsus_per_line), ("veh", real.tx_vehicles_per_line)):
        for i, pts in enumerate(per_line):
            for t in pts:
                out.write(f"{kind} {i} {float(t)!r}\n")
    if fh is None:
        return out.getvalue()
    return None


def load_realization(text_or_fh) -> NetworkRealization:
    text = text_or_fh if isinstance(text_or_fh, str) else text_or_fh.read()
    radius = None
    lines: list[Line] = []
    rsus: dict[int, list] = {}
    vehs: dict[int, list] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("#", 1)[0].strip()
        if not raw:
            continue
        parts = raw.split()
        try:
            if parts[0] == "window":
                radius = float(parts[1])
            elif parts[0] == "line":
                if int(parts[1]) != len(lines):
                    raise ValueError("line records must be numbered 0, 1, ...")
                lines.append(Line(float(parts[2]), float(parts[3])))
            elif parts[0] in ("rsu", "veh"):
                (rsus if parts[0] == "rsu" else vehs).setdefault(int(parts[1]), []).append(float(parts[2]))
            else:
                raise ValueError(f"unknown record {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if radius is None:
        raise ValueError("missing window record")
    per = lambda d: tuple(np.array(sorted(d.get(i, ()))) for i in range(len(lines)))  # noqa: E731
    return NetworkRealization(tuple(lines), per(rsus), per(vehs), radius)


# ---------------------------------------------------------------------------
# interference from outside the window


def line_tail_mean(y, window_radius: float, eta: float):
    """``int_{|t| > h} (y^2 + t^2)^(-eta/2) dt`` for a road at distance y <= R, h its half chord.

    Mean path-loss sum of a unit-density process on the part of the road
    outside the window.
    """
    y = np.asarray(y, dtype=float)
    R = float(window_radius)
    a = 0.5 * (eta - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.clip((y / R) ** 2, 0.0, 1.0)
        val = y ** (1.0 - eta) * special.beta(a, 0.5) * special.betainc(a, 0.5, x)
    out = np.where(y > 0, val, 2.0 * R ** (1.0 - eta) / (eta - 1.0))
    return float(out) if out.ndim == 0 else out


def outside_lines_tail_mean(rho: float, window_radius: float, eta: float) -> float:
    """Mean path-loss sum from unit-density roads that miss the window entirely."""
    return 2.0 * rho * special.beta(0.5 * (eta - 1.0), 0.5) * window_radius ** (2.0 - eta) / (eta - 2.0)


def tail_interference_mean(params: ModelParams, window_radius: float) -> float:
    """Expected interference power at the origin from points outside the window."""
    eta = params.eta
    per_density = line_tail_mean(0.0, window_radius, eta) + outside_lines_tail_mean(
        params.rho, window_radius, eta
    )
    # roads cutting the window: y uniform on [0, R] with 2 rho R of them on average
    y, w = np.polynomial.legendre.leggauss(64)
    y = 0.5 * window_radius * (y + 1.0)
    cutting = 2.0 * params.rho * 0.5 * window_radius * float(np.sum(w * line_tail_mean(y, window_radius, eta)))
    power = params.kappa * params.lambda_ru + params.nu * params.lambda_vt
    return power * (per_density + cutting) / params.mu


def _tail_variance(params: ModelParams, R: float) -> float:
    """Variance of the outside-window interference around its mean (2-D approximation)."""
    eta, mu, rho = params.eta, params.mu, params.rho
    points = (
        rho * (params.kappa**2 * params.lambda_ru + params.nu**2 * params.lambda_vt)
        * (2.0 / mu**2) * 2.0 * math.pi * R ** (2.0 - 2.0 * eta) / (2.0 * eta - 2.0)
    )
    per_line = (params.kappa * params.lambda_ru + params.nu * params.lambda_vt) * special.beta(
        0.5 * (eta - 1.0), 0.5
    ) / mu
    lines = 2.0 * rho * per_line**2 * R ** (3.0 - 2.0 * eta) / (2.0 * eta - 3.0)
    return points + lines


def edge_error_bound(params: ModelParams, window_radius: float, max_serving_distance: float = 1.0) -> float:
    """Error on a coverage probability from replacing outside interference by its mean.

    ``E[exp(-s I)] = exp(-s E I) (1 + O(s^2 Var I / 2))``. Every coverage
    integrand also carries the thermal factor ``exp(-s N)``, so the bound is
    ``max_s s^2 exp(-s N) Var / 2`` over Laplace arguments up to the one met at
    ``max_serving_distance`` (RSU link, interference in units of kappa).
    """
    s_max = params.mu * params.threshold * max_serving_distance**params.eta / params.kappa
    n = params.noise / params.kappa
    s = min(s_max, 2.0 / n) if n > 0 else s_max
    return 0.5 * s * s * math.exp(-s * n) * _tail_variance(params, window_radius)


def default_window_radius(
    params: ModelParams, max_serving_distance: float = 1.0, tol: float = 1e-3, minimum: float = 4.0
) -> float:
    """Smallest radius (0.5 km grid, at least ``minimum``) with :func:`edge_error_bound` <= tol."""
    R = float(minimum)
    while edge_error_bound(params, R, max_serving_distance) > tol and R < 200.0:
        R += 0.5
    return R
