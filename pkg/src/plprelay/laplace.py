"""Laplace transforms of RSU and vehicle interference at the typical vehicle.

All transforms follow from the probability generating functional of a 1-D
Poisson process on each road and of the Poisson line process over roads. With
Rayleigh fading of rate ``mu`` a point at distance ``d`` contributes the factor
``mu / (mu + s d^-eta)`` per epoch; joint transforms over two epochs with
independent fading on the same points use the product of two such factors,
i.e. the per-point exponent :func:`zeta2`.

Interference components (``InterferenceComponent``), conditioned on the
serving event and serving distance ``rb1``:

``I0``  RSUs on the own road L0 (beyond ``rb1``).
``I1``  RSUs on the serving road other than the server (cross-road events only).
``I2``  RSUs on roads nearer than the serving road (cross-road events only).
``I3``  RSUs on the remaining roads that cut the disk b(o, rb1).
``I4``  RSUs on roads that miss the disk b(o, rb1).
``I_ru`` all RSUs, unconditioned.
``I_vt`` all transmitting vehicles (independent of the RSU conditioning).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distributions import ServingEvent
from .model import ModelParams
from .quadrature import QuadratureSpec, chebyshev_cumulative, chebyshev_nodes, gauss_legendre, integrate

__all__ = [
    "InterferenceComponent",
    "Conditioning",
    "zeta2",
    "joint_lt_own_line",
    "single_lt",
    "joint_lt",
    "line_exponent",
    "RsuKernel",
]

X_ORDER = 64
U_ORDER = 48
PHI_ORDER = 32


class InterferenceComponent(enum.Enum):
    I0 = "I0"
    I1 = "I1"
    I2 = "I2"
    I3 = "I3"
    I4 = "I4"
    I_RU = "I_ru"
    I_VT = "I_vt"


RSU_PARTS = (
    InterferenceComponent.I0,
    InterferenceComponent.I1,
    InterferenceComponent.I2,
    InterferenceComponent.I3,
    InterferenceComponent.I4,
)


@dataclass(frozen=True)
class Conditioning:
    """Serving event plus serving distance ``rb1`` (must be >= y for cross-road events)."""

    event: ServingEvent
    rb1: float

    def __post_init__(self):
        if not self.rb1 > 0:
            raise ValueError("rb1 must be > 0")
        if not self.event.is_own and self.rb1 < self.event.y:
            raise ValueError("rb1 must be >= the serving road distance y")


def zeta2(x, y, s_a, s_b, params: ModelParams):
    """Per-point exponent ``1 - mu/(mu + s_a d^-eta) * mu/(mu + s_b d^-eta)``, d^2 = x^2 + y^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d2 = x * x + y * y
    out = _zeta_d2(d2, s_a, s_b, params.mu, params.eta)
    return float(out) if np.ndim(out) == 0 else out


def _zeta_d2(d2, s_a, s_b, mu, eta):
    # (A (s_a + s_b) + s_a s_b) / ((A + s_a)(A + s_b)), A = mu d^eta; no cancellation at either end
    a = mu * np.power(d2, 0.5 * eta)
    with np.errstate(invalid="ignore"):
        num = a * (s_a + s_b) + s_a * s_b
        den = (a + s_a) * (a + s_b)
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return out


def _tail_map(order, decay):
    """GL nodes/weights for int_0^inf g(w) dw with w = (t/(1-t))^k.

    ``decay`` is the power-law exponent of g at infinity; k is chosen so the
    mapped integrand vanishes at least linearly at t = 1.
    """
    k = max(1.0, math.ceil(2.0 / (decay - 1.0))) if decay > 1.0 else 1.0
    t, w = gauss_legendre(order, 0.0, 1.0)
    ratio = t / (1.0 - t)
    nodes = ratio**k
    weights = w * k * ratio ** (k - 1.0) / (1.0 - t) ** 2
    return nodes, weights


def line_exponent(c, u, s_a, s_b, mu, eta, order: int = X_ORDER):
    """``int_c^inf zeta2(x, u) dx`` for a road at distance ``u``, points with |t| > c.

    The per-road log-PGFL of a Poisson process of density ``lam`` restricted
    to |t| > c is ``-2 lam`` times this. Broadcasts over all arguments; uses a
    Gauss-Legendre rule after x = c + l (t/(1 - t))^k with l the largest of
    the chord, the road distance and the fading-transition distance.
    """
    c, u, s_a, s_b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (c, u, s_a, s_b)))
    dstar = np.power((s_a + s_b) / mu, 1.0 / eta)
    ell = np.maximum(np.maximum(c, u), dstar)
    ell = np.where(ell > 0, ell, 1.0)[..., None]
    nodes, weights = _tail_map(order, eta)
    x = c[..., None] + ell * nodes
    uu = u[..., None]
    z = _zeta_d2(x * x + uu * uu, s_a[..., None], s_b[..., None], mu, eta)
    return np.sum(z * weights * ell, axis=-1)


def _lt_exp(logv):
    out = np.exp(logv)
    return float(out) if np.ndim(out) == 0 else out


def joint_lt_own_line(s_a, s_b, rb1, params: ModelParams, spec: QuadratureSpec | None = None) -> float:
    """Joint transform of own-road RSU interference in the relay and direct epochs.

    ``exp(-2 lam_ru int_rb1^inf zeta2(x, 0, s_a, s_b) dx)``: the RSUs beyond the
    serving distance seen with independent fading in both epochs.
    """
    if not rb1 >= 0:
        raise ValueError("rb1 must be >= 0")
    if s_a == 0 and s_b == 0:
        return 1.0
    mu, eta = params.mu, params.eta
    res = integrate(
        lambda x: _zeta_d2(x * x, s_a, s_b, mu, eta),
        float(rb1),
        np.inf,
        spec,
        points=_scale_points(rb1, s_a + s_b, mu, eta),
        strict=True,
    )
    return math.exp(-2.0 * params.lambda_ru * res.value)


def _scale_points(lo, s, mu, eta):
    d = (s / mu) ** (1.0 / eta)
    return [p for p in (d, 4.0 * d) if p > lo]


class RsuKernel:
    """Vectorized log-transforms of the conditioned RSU interference components.

    Every method accepts NumPy arrays that broadcast against each other and
    returns natural logarithms, so that callers can assemble products of many
    factors without underflow. ``s_b = 0`` gives single-epoch transforms.
    """

    def __init__(self, params: ModelParams, x_order=X_ORDER, u_order=U_ORDER, phi_order=PHI_ORDER):
        self.p = params
        self.x_order = x_order
        self.u_order = u_order
        self.phi_order = phi_order

    def _line(self, density, c, u, s_a, s_b):
        return -2.0 * density * line_exponent(c, u, s_a, s_b, self.p.mu, self.p.eta, self.x_order)

    def _coupled(self, v_a):
        return v_a is not None and self.p.lambda_vt > 0

    def _road(self, c, u, s_a, s_b, v_a=None, v_b=None):
        """log PGFL of one road at distance u: RSUs with |t| > c, plus all its vehicles if given."""
        out = self._line(self.p.lambda_ru, c, u, s_a, s_b)
        if self._coupled(v_a):
            out = out + self._line(self.p.lambda_vt, 0.0, u, v_a, 0.0 if v_b is None else v_b)
        return out

    @staticmethod
    def _veh_args(v_a, v_b, like):
        if v_a is None:
            return None, None
        v_a = np.broadcast_to(np.asarray(v_a, dtype=float), like.shape)
        v_b = np.broadcast_to(np.asarray(0.0 if v_b is None else v_b, dtype=float), like.shape)
        return v_a, v_b

    # ---- single roads -------------------------------------------------------------
    def own(self, r, s_a, s_b, density=None):
        """Own road L0, points beyond distance ``r`` on both sides."""
        density = self.p.lambda_ru if density is None else density
        return self._line(density, r, 0.0, s_a, s_b)

    def own_vehicles(self, v_a, v_b):
        """All transmitting vehicles of the own road L0."""
        if self.p.lambda_vt == 0:
            return np.zeros(np.shape(np.asarray(v_a, dtype=float)))
        return self._line(self.p.lambda_vt, 0.0, 0.0, v_a, v_b)

    def serving_road(self, r, y, s_a, s_b, v_a=None, v_b=None):
        """Serving road at distance y: RSUs beyond the chord, server excluded."""
        r = np.asarray(r, dtype=float)
        y = np.asarray(y, dtype=float)
        c = np.sqrt(np.maximum(r * r - y * y, 0.0))
        return self._road(c, y, s_a, s_b, v_a, v_b)

    # ---- roads cutting the disk b(o, r) ------------------------------------------------
    def _disk_roads(self, r, lo, hi, s_a, s_b, v_a=None, v_b=None):
        """Integrals over roads at distance u in [lo, hi] <= r (u = r sin(phi)).

        Returns (int v F du, int v (1 - F) du, int v du) where v is the road's
        void probability inside the disk and F its conditioned per-road PGFL.
        """
        r, lo, hi, s_a, s_b = np.broadcast_arrays(
            *(np.asarray(v, dtype=float) for v in (r, lo, hi, s_a, s_b))
        )
        v_a, v_b = self._veh_args(v_a, v_b, r)
        with np.errstate(invalid="ignore", divide="ignore"):
            phi_lo = np.arcsin(np.clip(np.where(r > 0, lo / r, 0.0), 0.0, 1.0))
            phi_hi = np.arcsin(np.clip(np.where(r > 0, hi / r, 0.0), 0.0, 1.0))
        t, w = gauss_legendre(self.phi_order, 0.0, 1.0)
        span = (phi_hi - phi_lo)[..., None]
        phi = phi_lo[..., None] + span * t
        rr = r[..., None]
        u = rr * np.sin(phi)
        c = rr * np.cos(phi)
        jac = c * w * span  # du = r cos(phi) dphi
        log_v = -2.0 * self.p.lambda_ru * c
        ex = (lambda a: None) if v_a is None else (lambda a: a[..., None])
        log_f = self._road(c, u, s_a[..., None], s_b[..., None], ex(v_a), ex(v_b))
        v = np.exp(log_v)
        vf = np.exp(log_v + log_f)
        v_one_minus_f = -v * np.expm1(log_f)
        return (
            np.sum(vf * jac, axis=-1),
            np.sum(v_one_minus_f * jac, axis=-1),
            np.sum(v * jac, axis=-1),
        )

    def far_roads(self, r, s_a, s_b, density=None, v_a=None, v_b=None):
        """Roads at distance u >= r with no exclusion: -2 rho int_r^inf (1 - F) du.

        With vehicle arguments ``v_a``/``v_b`` each road's factor also holds
        its transmitting vehicles (RSU ``density`` must then be the default).
        """
        density = self.p.lambda_ru if density is None else density
        r, s_a, s_b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, s_a, s_b)))
        v_a, v_b = self._veh_args(v_a, v_b, r)
        mu, eta = self.p.mu, self.p.eta
        dstar = np.power((s_a + s_b) / mu, 1.0 / eta)
        if v_a is not None:
            dstar = np.maximum(dstar, np.power((v_a + v_b) / mu, 1.0 / eta))
        ell = np.maximum(r, dstar)
        ell = np.where(ell > 0, ell, 1.0)[..., None]
        # 1 - F(u) decays like u^(1 - eta)
        nodes, weights = _tail_map(self.u_order, eta - 1.0)
        u = r[..., None] + ell * nodes
        jac = ell * weights
        log_f = self._line(density, 0.0, u, s_a[..., None], s_b[..., None])
        if self._coupled(v_a):
            log_f = log_f + self._line(self.p.lambda_vt, 0.0, u, v_a[..., None], v_b[..., None])
        return -2.0 * self.p.rho * np.sum(-np.expm1(log_f) * jac, axis=-1)

    # ---- conditioned components ----------------------------------------------------------
    # With vehicle arguments (v_a, v_b) the road factors of I1..I4 also hold the
    # vehicles of those roads and "V0" holds the vehicles of L0: the product of
    # all parts is then the joint transform of RSU and vehicle interference,
    # which share the random roads and are therefore dependent.
    def e0_parts(self, r, s_a, s_b, v_a=None, v_b=None):
        """Log-transforms (I0, I3, I4) and the log void factor given e0 at distance r."""
        rho = self.p.rho
        _, v1mf, v = self._disk_roads(r, 0.0, r, s_a, s_b, v_a, v_b)
        r = np.asarray(r, dtype=float)
        out = {
            "I0": self.own(r, s_a, s_b),
            "I3": -2.0 * rho * v1mf,
            "I4": self.far_roads(r, s_a, s_b, v_a=v_a, v_b=v_b),
            "void": -2.0 * rho * (r - v),
        }
        if v_a is not None:
            out["V0"] = self.own_vehicles(v_a, 0.0 if v_b is None else v_b)
        return out

    def en_parts(self, r, y, s_a, s_b, v_a=None, v_b=None):
        """Log-transform pieces given a cross-road serving event at distance r.

        Returns I0, I1, I3, I4 as logs, ``vf_near`` = int_0^y v F du and
        ``v_near`` = int_0^y v du (for the rank-dependent I2 factor and void
        probability) and ``void_far`` = log P[roads beyond y void].
        """
        rho = self.p.rho
        r = np.asarray(r, dtype=float)
        y = np.asarray(y, dtype=float)
        vf_near, _, v_near = self._disk_roads(r, 0.0, y, s_a, s_b, v_a, v_b)
        _, v1mf_far, v_far = self._disk_roads(r, y, r, s_a, s_b, v_a, v_b)
        out = {
            "I0": self.own(r, s_a, s_b),
            "I1": self.serving_road(r, y, s_a, s_b, v_a, v_b),
            "I3": -2.0 * rho * v1mf_far,
            "I4": self.far_roads(r, s_a, s_b, v_a=v_a, v_b=v_b),
            "vf_near": vf_near,
            "v_near": v_near,
            "void_far": -2.0 * rho * ((r - y) - v_far),
        }
        if v_a is not None:
            out["V0"] = self.own_vehicles(v_a, 0.0 if v_b is None else v_b)
        return out

    def en_profile(self, r, s_a, s_b, phi, cheb_order=48, v_a=None, v_b=None):
        """Cross-road pieces for serving roads at y = r sin(phi), many phi at once.

        ``r``, ``s_a`` and ``s_b`` are 1-D arrays of equal length (or
        scalars), ``phi`` a 1-D array of angles in [0, pi/2]. The cumulative
        integrals over nearer and farther roads come from one Chebyshev fit
        per r. Returns a dict of arrays: ``I0``, ``I4`` with shape (R,) and
        ``I1``, ``I3``, ``vf_near``, ``void_far`` with shape (R, P).
        """
        r, s_a, s_b = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float)) for v in (r, s_a, s_b)))
        v_a, v_b = self._veh_args(v_a, v_b, r)
        col = (lambda a: None) if v_a is None else (lambda a: a[:, None])
        phi = np.asarray(phi, dtype=float)
        rho, lam = self.p.rho, self.p.lambda_ru
        half_pi = 0.5 * np.pi
        rr = r[:, None]
        node = chebyshev_nodes(cheb_order, 0.0, half_pi)
        c = rr * np.cos(node)
        u = rr * np.sin(node)
        log_v = -2.0 * lam * c
        log_f = self._road(c, u, s_a[:, None], s_b[:, None], col(v_a), col(v_b))
        v = np.exp(log_v) * c  # du = r cos(phi) dphi
        h = np.stack([v * np.exp(log_f), -v * np.expm1(log_f), v])
        at = np.concatenate([phi, [half_pi]])
        cum = chebyshev_cumulative(h, 0.0, half_pi, at)
        vf_near = np.maximum(cum[0, :, :-1], 0.0)
        v1mf_far = np.maximum(cum[1, :, -1:] - cum[1, :, :-1], 0.0)
        v_far = np.maximum(cum[2, :, -1:] - cum[2, :, :-1], 0.0)
        y = rr * np.sin(phi)
        out = {
            "I0": self.own(r, s_a, s_b),
            "I1": self._road(rr * np.cos(phi), y, s_a[:, None], s_b[:, None], col(v_a), col(v_b)),
            "I3": -2.0 * rho * v1mf_far,
            "I4": self.far_roads(r, s_a, s_b, v_a=v_a, v_b=v_b),
            "vf_near": vf_near,
            "void_far": -2.0 * rho * ((rr - y) - v_far),
        }
        if v_a is not None:
            out["V0"] = self.own_vehicles(v_a, v_b)
        return out

    # ---- unconditioned ------------------------------------------------------------------
    def unconditioned(self, s_a, s_b, density):
        """Log-transform of all points of a given density on every road."""
        zero = np.zeros_like(np.asarray(s_a, dtype=float))
        return self.own(zero, s_a, s_b, density) + self.far_roads(zero, s_a, s_b, density)

    def unconditioned_joint(self, s_a, s_b, v_a, v_b):
        """Joint log-transform of all RSUs (at s_a, s_b) and all vehicles (at v_a, v_b)."""
        zero = np.zeros_like(np.asarray(s_a, dtype=float) + np.asarray(v_a, dtype=float))
        return (
            self.own(zero, s_a, s_b)
            + self.own_vehicles(v_a + zero, v_b + zero)
            + self.far_roads(zero, s_a, s_b, v_a=v_a, v_b=v_b)
        )


def _component_log(component, s_a, s_b, params, conditioning, kernel=None):
    k = kernel or RsuKernel(params)
    C = InterferenceComponent
    if component is C.I_VT:
        return k.unconditioned(s_a, s_b, params.lambda_vt)
    if component is C.I_RU:
        if conditioning is None:
            return k.unconditioned(s_a, s_b, params.lambda_ru)
        return sum(_component_log(c, s_a, s_b, params, conditioning, k) for c in RSU_PARTS)
    if conditioning is None:
        if component is C.I0:
            return k.own(0.0, s_a, s_b)
        raise ValueError(f"{component.value} is only defined under a serving-event conditioning")
    r = conditioning.rb1
    ev = conditioning.event
    if ev.is_own:
        if component in (C.I1, C.I2):
            return 0.0
        return k.e0_parts(r, s_a, s_b)[component.value]
    parts = k.en_parts(r, ev.y, s_a, s_b)
    if component is C.I2:
        if ev.n == 1:
            return 0.0
        return (ev.n - 1) * (np.log(parts["vf_near"]) - np.log(parts["v_near"]))
    return parts[component.value]


def single_lt(component, s, params: ModelParams, conditioning: Conditioning | None = None) -> float:
    """Laplace transform E[exp(-s I)] of one interference component.

    Unconditioned transforms are available for ``I0`` (whole own road),
    ``I_ru`` and ``I_vt``. Under a :class:`Conditioning` the RSU components
    see only RSUs outside b(o, rb1) (the server excluded); ``I_ru`` then gives
    the product of all RSU components.
    """
    return joint_lt(component, s, 0.0, params, conditioning)


def joint_lt(component, s_a, s_b, params: ModelParams, conditioning: Conditioning | None = None) -> float:
    """Joint transform E[exp(-s_a I' - s_b I)] over two independently faded epochs.

    Both epochs see the same point locations; under a conditioning they are
    the RSUs outside b(o, rb1). ``joint_lt(c, s, 0, ...) == single_lt(c, s, ...)``.
    """
    component = InterferenceComponent(component)
    if s_a < 0 or s_b < 0:
        raise ValueError("Laplace arguments must be >= 0")
    if s_a == 0 and s_b == 0:
        return 1.0
    return _lt_exp(_component_log(component, float(s_a), float(s_b), params, conditioning))
