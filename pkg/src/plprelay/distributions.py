"""Distance laws and serving-road probabilities for the road/RSU process.

Conventions
-----------
* ``Y_n`` is the perpendicular distance from the origin to the n-th nearest
  road other than the typical vehicle's own road ``L0``.
* ``f_R(r | e0)`` and ``f_R(r | en, y)`` are the laws of the nearest RSU *on
  that road* (own road, resp. a road at distance y). Whether that RSU is also
  the overall nearest one is carried by the void probability of all other
  roads, see :func:`prob_e0_given_distance` and
  :func:`prob_en_given_yn_distance`. The product of the two is the joint
  density of (serving road, serving distance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .model import ModelParams
from .quadrature import QuadratureSpec, gauss_legendre, integrate

__all__ = [
    "ServingEvent",
    "pdf_yn",
    "cdf_yn",
    "pdf_serving_distance_own",
    "cdf_serving_distance_own",
    "pdf_serving_distance_cross",
    "cdf_serving_distance_cross",
    "void_exponent",
    "prob_e0_given_distance",
    "prob_en_given_yn_distance",
    "prob_e0",
    "prob_en_given_yn",
    "serving_distance_survival",
    "pdf_serving_distance",
    "pdf_serving_distance_given_e0",
]

PHI_ORDER = 64


@dataclass(frozen=True)
class ServingEvent:
    """Which road hosts the serving (nearest) RSU.

    ``kind`` is ``"e0"`` for the own road and ``"en"`` for the road of rank
    ``n`` (1 = nearest other road) at perpendicular distance ``y``.
    """

    kind: str
    n: int = 0
    y: float = 0.0

    def __post_init__(self):
        if self.kind == "e0":
            if self.n != 0:
                raise ValueError("e0 carries no road rank")
        elif self.kind == "en":
            if self.n < 1 or not self.y > 0:
                raise ValueError("en needs n >= 1 and y > 0")
        else:
            raise ValueError(f"unknown serving event kind {self.kind!r}")

    @classmethod
    def own(cls) -> "ServingEvent":
        return cls("e0")

    @classmethod
    def cross(cls, n: int, y: float) -> "ServingEvent":
        return cls("en", int(n), float(y))

    @property
    def is_own(self) -> bool:
        return self.kind == "e0"

    def __str__(self):
        return "e0" if self.is_own else f"e{self.n}(y={self.y:.4g})"


def pdf_yn(params: ModelParams, n: int, y):
    """Erlang(n, 2 rho) density of the n-th nearest road distance."""
    if n < 1:
        raise ValueError("rank n must be >= 1")
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("y must be >= 0")
    k = 2.0 * params.rho
    logp = n * math.log(k) + special.xlogy(n - 1, y) - k * y - math.lgamma(n)
    out = np.exp(logp)
    return float(out) if out.ndim == 0 else out


def cdf_yn(params: ModelParams, n: int, y):
    """P[Y_n <= y]; also the rank-n tail bound used when truncating rank sums."""
    y = np.asarray(y, dtype=float)
    out = special.gammainc(n, 2.0 * params.rho * y)
    return float(out) if out.ndim == 0 else out


def pdf_serving_distance_own(params: ModelParams, r):
    """Density of the nearest RSU distance along the own road."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be >= 0")
    lam = params.lambda_ru
    out = 2.0 * lam * np.exp(-2.0 * lam * r)
    return float(out) if out.ndim == 0 else out


def cdf_serving_distance_own(params: ModelParams, r):
    r = np.asarray(r, dtype=float)
    out = -np.expm1(-2.0 * params.lambda_ru * np.maximum(r, 0.0))
    return float(out) if out.ndim == 0 else out


def pdf_serving_distance_cross(params: ModelParams, r, y):
    """Density of the nearest RSU distance on a road at perpendicular distance y.

    ``2 lam r exp(-2 lam sqrt(r^2 - y^2)) / sqrt(r^2 - y^2)`` for r > y; the
    singularity at r = y is integrable.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(r < y):
        raise ValueError("r must be >= y (support of the chord law)")
    lam = params.lambda_ru
    chord = np.sqrt(np.maximum(r * r - y * y, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2.0 * lam * r * np.exp(-2.0 * lam * chord) / chord
    out = np.where(chord > 0, out, np.inf)
    return float(out) if out.ndim == 0 else out


def cdf_serving_distance_cross(params: ModelParams, r, y):
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    chord = np.sqrt(np.maximum(r * r - y * y, 0.0))
    out = -np.expm1(-2.0 * params.lambda_ru * chord)
    return float(out) if out.ndim == 0 else out


def void_exponent(params: ModelParams, r, lo, hi, order: int = PHI_ORDER):
    """``int_lo^hi (1 - exp(-2 lam sqrt(r^2 - u^2))) du`` for 0 <= lo <= hi <= r.

    This is the mean number (per unit line intensity) of roads at distance in
    [lo, hi] that carry at least one RSU inside the disk b(o, r). Evaluated in
    the angle u = r sin(phi), which removes the square-root edge at u = r.
    Broadcasts over ``r``, ``lo`` and ``hi``.
    """
    r = np.asarray(r, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        phi_lo = np.arcsin(np.clip(np.where(r > 0, lo / r, 0.0), 0.0, 1.0))
        phi_hi = np.arcsin(np.clip(np.where(r > 0, hi / r, 0.0), 0.0, 1.0))
    t, w = gauss_legendre(order, 0.0, 1.0)
    phi_lo, phi_hi, r = np.broadcast_arrays(phi_lo, phi_hi, r)
    span = (phi_hi - phi_lo)[..., None]
    phi = phi_lo[..., None] + span * t
    cos = np.cos(phi)
    rr = r[..., None]
    integrand = -np.expm1(-2.0 * params.lambda_ru * rr * cos) * rr * cos
    out = np.sum(integrand * w, axis=-1) * span[..., 0]
    return float(out) if out.ndim == 0 else out


def prob_e0_given_distance(params: ModelParams, r):
    """P[no RSU of another road inside b(o, r)].

    Given that the nearest own-road RSU is at distance r, this is the
    probability that it is also the overall nearest RSU.
    """
    out = np.exp(-2.0 * params.rho * void_exponent(params, r, 0.0, r))
    return float(out) if np.ndim(out) == 0 else out


def prob_en_given_yn_distance(params: ModelParams, n: int, y, r):
    """P[road n at distance y hosts the overall nearest RSU | its nearest RSU is at r].

    Requires the own road and every other road to be void inside b(o, r):
    the own road contributes exp(-2 lam r), the n-1 nearer roads are i.i.d.
    uniform on [0, y] and the farther roads form a Poisson process on (y, inf).
    """
    if n < 1:
        raise ValueError("rank n must be >= 1")
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r < y):
        raise ValueError("r must be >= y")
    lam, rho = params.lambda_ru, params.rho
    own = np.exp(-2.0 * lam * r)
    beyond = np.exp(-2.0 * rho * void_exponent(params, r, y, r))
    if n == 1:
        nearer = 1.0
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            mean_void = 1.0 - void_exponent(params, r, 0.0, y) / y
        nearer = np.where(y > 0, mean_void, 1.0) ** (n - 1)
    out = own * nearer * beyond
    return float(out) if np.ndim(out) == 0 else out


def prob_e0(params: ModelParams, spec: QuadratureSpec | None = None) -> float:
    """Probability that the nearest RSU lies on the typical vehicle's own road."""
    res = integrate(
        lambda r: pdf_serving_distance_own(params, r) * prob_e0_given_distance(params, r),
        0.0,
        np.inf,
        spec,
        strict=True,
    )
    return min(res.value, 1.0)


def prob_en_given_yn(params: ModelParams, n: int, y: float, spec: QuadratureSpec | None = None) -> float:
    """Probability that road n, at perpendicular distance y, hosts the nearest RSU."""
    if not y > 0:
        raise ValueError("y must be > 0")
    lam = params.lambda_ru

    # chord variable c = sqrt(r^2 - y^2) turns f_R(r | en, y) dr into 2 lam exp(-2 lam c) dc
    def integrand(c):
        r = np.sqrt(y * y + c * c)
        return 2.0 * lam * np.exp(-2.0 * lam * c) * prob_en_given_yn_distance(params, n, y, r)

    return integrate(integrand, 0.0, np.inf, spec, strict=True).value


def serving_distance_survival(params: ModelParams, r):
    """P[R > r] for the overall nearest RSU distance R (void probability of b(o, r))."""
    r = np.asarray(r, dtype=float)
    out = np.exp(-2.0 * params.lambda_ru * r) * prob_e0_given_distance(params, r)
    return float(out) if np.ndim(out) == 0 else out


def pdf_serving_distance(params: ModelParams, r):
    """Density of the overall nearest RSU distance, summed over serving roads.

    Built from the per-road pieces: own road plus the rank-collapsed
    contribution of all other roads (Poisson roads at intensity 2 rho).
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    lam, rho = params.lambda_ru, params.rho
    own = pdf_serving_distance_own(params, r) * prob_e0_given_distance(params, r)
    t, w = gauss_legendre(PHI_ORDER, 0.0, 1.0)
    # road at distance y = r sin(phi); f_R(r | y) dy = 2 lam r exp(-2 lam r cos(phi)) dphi
    phi = 0.5 * np.pi * t
    rr = r[:, None]
    cross = (
        2.0 * lam * rr * np.exp(-2.0 * lam * rr * np.cos(phi))
        * 2.0 * rho
        * np.exp(-2.0 * lam * rr)
        * np.exp(-2.0 * rho * void_exponent(params, rr, 0.0, rr))
    )
    # summing f_Yn * P[en | y, r] over ranks collapses to 2 rho * P[all others void]
    out = own + np.sum(cross * w, axis=1) * 0.5 * np.pi
    return out if out.size > 1 else float(out[0])


def pdf_serving_distance_given_e0(params: ModelParams, r, spec: QuadratureSpec | None = None):
    """Density of the serving distance conditioned on the serving RSU being on L0."""
    p0 = prob_e0(params, spec)
    return pdf_serving_distance_own(params, r) * prob_e0_given_distance(params, r) / p0
