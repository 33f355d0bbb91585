"""Analytic coverage probabilities: direct link, joint two-epoch terms, one-hop relay.

Integration layout
------------------
Every quantity here is an expectation over the serving configuration of the
typical vehicle: the serving road (own road, or the road of rank n at
distance y) and the serving distance r. Cross-road contributions are
integrated with r outermost and the road distance y = r sin(phi) innermost,
which covers the region {r > r_min, 0 < y < r} of the (y, r) plane exactly
once. The inner angle integral uses a fixed Gauss-Legendre rule; the outer r
integral is adaptive and vector-valued over (own road, rank 1..n_max).

The density of (serving road, serving distance) is the per-road nearest-RSU
law times the probability that all other roads are void inside b(o, r), so
integrands carry ``P[e0 | r]`` and ``P[en | y, r]`` rather than constants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .laplace import RsuKernel
from .model import ModelParams, SinrScales
from .quadrature import QuadratureSpec, cumulative_integrate, gauss_legendre, integrate, sum_ranks

__all__ = [
    "CoverageEstimate",
    "CoverageError",
    "CoverageWarning",
    "RELAY_FLOOR",
    "pc1_a",
    "pc2_a",
    "pc1_ab",
    "pc2_ab",
    "scenario_a_coverage",
    "relay_link_coverage",
    "xi1",
    "xi2",
    "xi3",
    "relay_coverage",
]

PHI_ORDER = 48
RELAY_FLOOR = 1e-6
COUPLINGS = ("road", "product")


class CoverageError(ArithmeticError):
    pass


class CoverageWarning(UserWarning):
    pass


@dataclass
class CoverageEstimate:
    """A coverage probability with its error budget.

    ``error`` is the quadrature/truncation budget for analytic values and the
    95% confidence half-width for Monte Carlo values.
    """

    value: float
    method: str
    error: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("analytic", "monte-carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.error >= 0:
            raise ValueError("error must be >= 0")

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# pointwise integrands


def _thermal(params, s, power):
    return -s * params.noise / power


def _vt_log(kernel, params, s_a, s_b=0.0):
    if params.lambda_vt == 0:
        return np.zeros(np.shape(np.asarray(s_a, dtype=float)))
    return kernel.unconditioned(s_a, s_b, params.lambda_vt)


def _check_coupling(coupling):
    if coupling not in COUPLINGS:
        raise ValueError(f"coupling must be one of {COUPLINGS}")
    return coupling == "road"


def _e0_log(kernel, r, s_a, s_b, v_a=None, v_b=None):
    parts = kernel.e0_parts(r, s_a, s_b, v_a, v_b)
    return parts["void"] + parts["I0"] + parts["I3"] + parts["I4"] + parts.get("V0", 0.0)


def _en_log(kernel, params, n, y, r, s_a, s_b, v_a=None, v_b=None):
    """log of f_Yn(y) P[en | y, r] prod L_Ik for one rank."""
    lam, rho = params.lambda_ru, params.rho
    parts = kernel.en_parts(r, y, s_a, s_b, v_a, v_b)
    log_fy = n * math.log(2.0 * rho) - 2.0 * rho * np.asarray(y) - math.lgamma(n)
    # y^(n-1) of f_Yn cancels against the mean nearer-road void (v_near / y)^(n-1),
    # and v_near^(n-1) against the denominator of the I2 factor (vf_near / v_near)^(n-1)
    nearer = special.xlogy(n - 1, parts["vf_near"])
    return (
        log_fy + nearer - 2.0 * lam * np.asarray(r) + parts["void_far"]
        + parts["I0"] + parts["I1"] + parts["I3"] + parts["I4"] + parts.get("V0", 0.0)
    )


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _check_r(r):
    if np.any(np.asarray(r) <= 0):
        raise ValueError("serving distance must be > 0")


def _check_ry(r, y):
    if np.any(np.asarray(y) <= 0):
        raise ValueError("road distance y must be > 0")
    if np.any(np.asarray(r) < np.asarray(y)):
        raise ValueError("serving distance must be >= the road distance y")


def _rsu_vt_log(k, params, coupling, e_log, s_b, v_b=0.0):
    """Combine RSU parts with vehicle interference at (s_b, v_b), coupled or as a product."""
    if _check_coupling(coupling):
        return e_log(s_b, v_b)
    return e_log(None, None) + _vt_log(k, params, s_b, v_b)


def pc1_a(r, s_a, s_b, params: ModelParams, coupling: str = "road"):
    """Direct coverage integrand for a serving RSU on the own road at distance r.

    ``P[e0 | r] exp(-mu T N r^eta / kappa) L_I0 L_I3 L_I4 (s_a) L_Ivt(s_b)``.
    Integrated against ``2 lam_ru exp(-2 lam_ru r)`` it gives the own-road
    share of the coverage probability. ``s_a = mu T r^eta`` and
    ``s_b = nu mu T r^eta / kappa`` for the typical link.

    ``coupling="road"`` evaluates RSU and vehicle interference jointly (they
    live on the same random roads); ``"product"`` multiplies their separate
    transforms as if they were independent.
    """
    _check_r(r)
    k = RsuKernel(params)
    r = np.asarray(r, dtype=float)
    m = params.mu * params.threshold
    logv = _rsu_vt_log(
        k, params, coupling, lambda va, vb: _e0_log(k, r, s_a, 0.0, va, vb), s_b
    ) + _thermal(params, m * r**params.eta, params.kappa)
    return _out(np.exp(logv))


def pc2_a(r, s_a, s_b, y, params: ModelParams, n: int = 1, coupling: str = "road"):
    """Direct coverage integrand for a serving RSU on the rank-n road at distance y.

    Includes the road-distance density ``f_Yn(y)`` and ``P[en | y, r]``;
    integrate against the chord law of the serving distance on that road.
    """
    if n < 1:
        raise ValueError("rank n must be >= 1")
    _check_ry(r, y)
    k = RsuKernel(params)
    r = np.asarray(r, dtype=float)
    m = params.mu * params.threshold
    logv = _rsu_vt_log(
        k, params, coupling, lambda va, vb: _en_log(k, params, n, y, r, s_a, 0.0, va, vb), s_b
    ) + _thermal(params, m * r**params.eta, params.kappa)
    return _out(np.exp(logv))


def _scales_r1(params, scales):
    return (scales.s6 / (params.mu * params.threshold)) ** (1.0 / params.eta)


def _ab_extra(k, params, rb1, scales, include_server):
    logv = _thermal(params, scales.s7, params.kappa) + _thermal(params, scales.s6, params.nu)
    if include_server:
        # the serving RSU itself interferes with the relay epoch
        logv = logv - np.log1p(scales.s5 * np.asarray(rb1, dtype=float) ** -params.eta / params.mu)
    return logv


def pc1_ab(rb1, scales: SinrScales, params: ModelParams, include_server: bool = True, coupling: str = "road"):
    """Joint (relay epoch B and direct epoch A) integrand, serving RSU on the own road.

    RSU components use the joint transform at (s5, s7), vehicles at
    (s6, s8), with thermal factor ``exp(-mu T N (r1^eta/nu + rb1^eta/kappa))``.
    With ``include_server`` the serving RSU, which is an interferer in the
    relay epoch, contributes ``mu / (mu + s5 rb1^-eta)``.
    """
    _check_r(rb1)
    if np.any(np.asarray(rb1) <= _scales_r1(params, scales) * (1 - 1e-12)):
        raise ValueError("rb1 must exceed the relay distance r1")
    k = RsuKernel(params)
    logv = _rsu_vt_log(
        k, params, coupling, lambda va, vb: _e0_log(k, rb1, scales.s5, scales.s7, va, vb), scales.s6, scales.s8
    ) + _ab_extra(k, params, rb1, scales, include_server)
    return _out(np.exp(logv))


def pc2_ab(
    rb1,
    scales: SinrScales,
    y,
    params: ModelParams,
    n: int = 1,
    include_server: bool = True,
    coupling: str = "road",
):
    """Joint two-epoch integrand for a serving RSU on the rank-n road at distance y."""
    if n < 1:
        raise ValueError("rank n must be >= 1")
    _check_ry(rb1, y)
    if np.any(np.asarray(rb1) <= _scales_r1(params, scales) * (1 - 1e-12)):
        raise ValueError("rb1 must exceed the relay distance r1")
    k = RsuKernel(params)
    logv = _rsu_vt_log(
        k,
        params,
        coupling,
        lambda va, vb: _en_log(k, params, n, y, rb1, scales.s5, scales.s7, va, vb),
        scales.s6,
        scales.s8,
    ) + _ab_extra(k, params, rb1, scales, include_server)
    return _out(np.exp(logv))


# ---------------------------------------------------------------------------
# integrated quantities


class _ServingIntegrator:
    """Serving-configuration densities of r, split by serving road.

    ``density(r, s_a, s_b, extra, v_a, v_b)`` returns shape (len(r), 1 + n_max):
    the own-road term ``2 lam e^{-2 lam r} P[e0|r] prod L`` followed by the
    rank-n terms already integrated over the road distance y in (0, r).
    ``s_a``, ``s_b`` are the RSU Laplace arguments, ``v_a``, ``v_b`` the
    vehicle ones (coupled with the RSUs road by road; ``None`` leaves
    vehicles out) and ``extra`` a log factor that depends on r only.
    """

    def __init__(
        self, params: ModelParams, spec: QuadratureSpec, coupling: str = "road", phi_order: int = PHI_ORDER
    ):
        self.p = params
        self.spec = spec
        self.coupled = _check_coupling(coupling)
        self.k = RsuKernel(params)
        self.phi, self.w = gauss_legendre(phi_order, 0.0, 0.5 * math.pi)
        n = np.arange(1, spec.n_max + 1)
        self.n = n
        self.log_rank = n * math.log(2.0 * params.rho) - special.gammaln(n)

    def vehicles(self, r, v_a, v_b):
        """Vehicle handling: (v_a, v_b, extra log) for coupled or product evaluation."""
        if self.coupled:
            return v_a, v_b, 0.0
        return None, None, _vt_log(self.k, self.p, v_a, v_b)

    def density(self, r, s_a, s_b, extra, v_a=None, v_b=None):
        p = self.p
        lam, rho = p.lambda_ru, p.rho
        r = np.atleast_1d(np.asarray(r, dtype=float))
        arrs = np.broadcast_arrays(
            *(np.asarray(v, dtype=float) for v in (s_a, s_b, extra, 0.0 if v_a is None else v_a,
                                                   0.0 if v_b is None else v_b)), r
        )
        s_a, s_b, extra, va, vb = arrs[:5]
        out = np.zeros((r.size, 1 + self.n.size))
        ok = r > 0
        if not ok.any():
            return out
        r, s_a, s_b, extra = r[ok], s_a[ok], s_b[ok], extra[ok]
        va, vb = (None, None) if v_a is None else (va[ok], vb[ok])

        own = math.log(2.0 * lam) - 2.0 * lam * r + _e0_log(self.k, r, s_a, s_b, va, vb) + extra
        prof = self.k.en_profile(r, s_a, s_b, self.phi, v_a=va, v_b=vb)
        rr = r[:, None]
        y = rr * np.sin(self.phi)
        common = (
            np.log(2.0 * lam * rr) - 2.0 * lam * rr * np.cos(self.phi)  # chord law in phi
            - 2.0 * rho * y - 2.0 * lam * rr + prof["void_far"]
            + prof["I0"][:, None] + prof["I1"] + prof["I3"] + prof["I4"][:, None]
            + (extra + prof.get("V0", 0.0))[:, None]
        )
        nm1 = (self.n - 1)[None, None, :]
        nearer = special.xlogy(nm1, prof["vf_near"][..., None])
        log_terms = common[..., None] + self.log_rank[None, None, :] + nearer
        cross = np.einsum("rpn,p->rn", np.exp(log_terms), self.w)
        out[ok, 0] = np.exp(own)
        out[ok, 1:] = cross
        return out


def _spec(spec):
    return spec or QuadratureSpec()


def _typical_args(params, r):
    """RSU and vehicle Laplace arguments of a direct link at serving distance r."""
    m = params.mu * params.threshold
    s = m * np.asarray(r, dtype=float) ** params.eta
    return s, s * params.nu / params.kappa


def _direct_density(si: _ServingIntegrator, r):
    p = si.p
    s_ru, s_vt = _typical_args(p, r)
    va, vb, vlog = si.vehicles(r, s_vt, 0.0)
    return si.density(r, s_ru, 0.0, _thermal(p, s_ru, p.kappa) + vlog, va, vb)


def _assemble(res, spec, label):
    """Own-road term plus truncated rank sum of an integrated (1 + n_max) vector."""
    own = float(res.value[0])
    ranks = sum_ranks(np.maximum(res.value[1:], 0.0), spec)
    tail = float(ranks.terms[-1]) if ranks.terms.size else 0.0
    if not ranks.converged:
        warnings.warn(f"{label}: rank series not converged at n_max={spec.n_max}", CoverageWarning, stacklevel=3)
    diag = {
        "own": own,
        "ranks_used": ranks.n_used,
        "rank_converged": ranks.converged,
        "quad_error": res.error,
        "quad_converged": res.converged,
        "n_eval": res.n_eval,
    }
    return own + ranks.value, res.error + tail, diag


def _r_points(params, lower):
    lam = params.lambda_ru
    return [x for x in (0.25 / lam, 1.0 / lam, 3.0 / lam) if x > lower]


def scenario_a_coverage(
    params: ModelParams,
    spec: QuadratureSpec | None = None,
    min_rb1: float = 0.0,
    coupling: str = "road",
) -> CoverageEstimate:
    """P[SINR_A > T and rb1 > min_rb1] for the direct RSU -> typical vehicle link.

    With ``min_rb1 = 0`` this is the plain direct coverage probability.
    """
    spec = _spec(spec)
    if min_rb1 < 0:
        raise ValueError("min_rb1 must be >= 0")
    si = _ServingIntegrator(params, spec, coupling)
    res = integrate(
        lambda r: _direct_density(si, r), float(min_rb1), np.inf, spec, points=_r_points(params, min_rb1)
    )
    value, err, diag = _assemble(res, spec, "direct coverage")
    return CoverageEstimate(min(max(value, 0.0), 1.0), "analytic", err, diag)


def relay_link_coverage(r1: float, params: ModelParams, coupling: str = "road") -> float:
    """P[SINR_B > T]: relay vehicle at r1 heard by the typical vehicle, no conditioning."""
    if not r1 > 0:
        raise ValueError("r1 must be > 0")
    m = params.mu * params.threshold
    s6 = m * r1**params.eta
    s5 = s6 * params.kappa / params.nu
    k = RsuKernel(params)
    if _check_coupling(coupling):
        inter = k.unconditioned_joint(s5, 0.0, s6, 0.0)
    else:
        inter = k.unconditioned(s5, 0.0, params.lambda_ru) + _vt_log(k, params, s6)
    return float(np.exp(_thermal(params, s6, params.nu) + inter))


def _xi_result(value, err, diag, full_output):
    if full_output:
        return CoverageEstimate(min(max(value, 0.0), 1.0), "analytic", err, diag)
    return value


def xi3(
    r1: float,
    params: ModelParams,
    spec: QuadratureSpec | None = None,
    full_output: bool = False,
    coupling: str = "road",
):
    """P[not (SINR_A > T and rb1 > r1)]: direct outage or serving RSU within r1."""
    if r1 < 0:
        raise ValueError("r1 must be >= 0")
    cov = scenario_a_coverage(params, spec, min_rb1=r1, coupling=coupling)
    return _xi_result(1.0 - cov.value, cov.error, cov.diagnostics, full_output)


def xi1(
    r1: float,
    params: ModelParams,
    spec: QuadratureSpec | None = None,
    full_output: bool = False,
    include_server: bool = True,
    coupling: str = "road",
):
    """P[SINR_B > T and not (SINR_A > T and rb1 > r1)].

    Relay-epoch coverage minus the joint mass where the direct link also
    covers from beyond r1. Both epochs see the same RSUs and vehicles with
    independent fading. With ``include_server`` the typical vehicle's serving
    RSU counts as an interferer of the relay epoch.
    """
    if not r1 > 0:
        raise ValueError("r1 must be > 0")
    spec = _spec(spec)
    p = params
    si = _ServingIntegrator(p, spec, coupling)
    m = p.mu * p.threshold
    s6 = m * r1**p.eta
    s5 = s6 * p.kappa / p.nu

    def joint(r):
        s7, s8 = _typical_args(p, r)
        va, vb, vlog = si.vehicles(r, np.full_like(s8, s6), s8)
        extra = _thermal(p, s7, p.kappa) + _thermal(p, s6, p.nu) + vlog
        if include_server:
            extra = extra - np.log1p(s5 * np.asarray(r, dtype=float) ** -p.eta / p.mu)
        return si.density(r, s5, s7, extra, va, vb)

    p_b = relay_link_coverage(r1, p, coupling)
    res = integrate(joint, float(r1), np.inf, spec, points=_r_points(p, r1))
    joint_mass, err, diag = _assemble(res, spec, "joint coverage")
    value = p_b - joint_mass
    diag.update(p_relay_link=p_b, joint_mass=joint_mass)
    if value < -err - spec.abs_tol:
        warnings.warn(f"xi1 negative beyond its budget ({value:.3g})", CoverageWarning, stacklevel=2)
        diag["negative"] = True
    return _xi_result(value, err, diag, full_output)


def xi2(
    r1: float,
    params: ModelParams,
    spec: QuadratureSpec | None = None,
    full_output: bool = False,
    coupling: str = "road",
):
    """P[SINR_rel > T and r0 < rb1 and rb1 > r1] with r0 and rb1 independent.

    ``r0`` is the relay vehicle's own serving distance (the relay sees the
    network from a typical location), ``rb1`` the typical vehicle's. The four
    cases (each serving RSU on its own road or another road) are reported in
    the diagnostics under ``cases`` in the order (own, own), (own, other),
    (other, own), (other, other), relay first.
    """
    if not r1 > 0:
        raise ValueError("r1 must be > 0")
    spec = _spec(spec)
    p = params
    si = _ServingIntegrator(p, spec, coupling)
    inner_spec = spec.scaled(0.1)

    def relay_parts(r0):
        d = _direct_density(si, r0)
        return np.column_stack([d[:, 0], d[:, 1:].sum(axis=1)])

    def inner(rb):
        # G1(rb), G2(rb): relay covered with r0 < rb, own road / other roads
        order = np.argsort(rb)
        bp = np.concatenate([[0.0], rb[order]])
        cum = cumulative_integrate(relay_parts, bp, inner_spec).value[1:]
        g = np.empty_like(cum)
        g[order] = cum
        return g

    def outer(rb):
        w = si.density(rb, 0.0, 0.0, 0.0)
        w = np.column_stack([w[:, 0], w[:, 1:].sum(axis=1)])
        g = inner(rb)
        return np.column_stack([g[:, 0] * w[:, 0], g[:, 0] * w[:, 1], g[:, 1] * w[:, 0], g[:, 1] * w[:, 1]])

    res = integrate(outer, float(r1), np.inf, spec, points=_r_points(p, r1))
    cases = np.asarray(res.value, dtype=float)
    value = float(cases.sum())
    # rank truncation: the omitted ranks bound both inner and outer rank sums
    w_tot = integrate(lambda r: si.density(r, 0.0, 0.0, 0.0), 0.0, np.inf, spec, points=_r_points(p, 0.0))
    ranks = sum_ranks(np.maximum(w_tot.value[1:], 0.0), spec)
    tail = float(ranks.terms[-1]) if ranks.terms.size else 0.0
    err = res.error + 2.0 * tail
    diag = {
        "cases": tuple(float(c) for c in cases),
        "ranks_used": ranks.n_used,
        "rank_converged": ranks.converged,
        "quad_error": res.error,
        "quad_converged": res.converged,
        "n_eval": res.n_eval,
    }
    return _xi_result(value, err, diag, full_output)


def relay_coverage(
    r1: float, params: ModelParams, spec: QuadratureSpec | None = None, coupling: str = "road"
) -> CoverageEstimate:
    """One-hop relay coverage ``xi1 * xi2 / xi3``.

    The probability that the relay hop covers the typical vehicle given the
    direct link failed (or the serving RSU lies within r1), times the
    probability that the relay vehicle is itself covered with its RSU nearer
    than the typical vehicle's.
    """
    if not r1 > 0:
        raise ValueError("r1 must be > 0")
    spec = _spec(spec)
    e1 = xi1(r1, params, spec, full_output=True, coupling=coupling)
    e2 = xi2(r1, params, spec, full_output=True, coupling=coupling)
    e3 = xi3(r1, params, spec, full_output=True, coupling=coupling)
    if e3.value <= RELAY_FLOOR:
        raise CoverageError(
            f"conditioning event nearly impossible: P[direct outage] = {e3.value:.3g}; "
            "direct coverage is essentially certain and relaying is irrelevant"
        )
    v1 = e1.diagnostics["p_relay_link"] - e1.diagnostics["joint_mass"]
    v2, v3 = e2.value, e3.value
    value = v1 * v2 / v3
    rel = e1.error / max(abs(v1), 1e-300) + e2.error / max(v2, 1e-300) + e3.error / v3
    err = abs(value) * rel
    diag = {
        "xi1": v1,
        "xi2": v2,
        "xi3": v3,
        "xi2_cases": e2.diagnostics["cases"],
        "ranks_used": {
            "xi1": e1.diagnostics["ranks_used"],
            "xi2": e2.diagnostics["ranks_used"],
            "xi3": e3.diagnostics["ranks_used"],
        },
        "errors": {"xi1": e1.error, "xi2": e2.error, "xi3": e3.error},
        "coupling": coupling,
    }
    return CoverageEstimate(min(max(value, 0.0), 1.0), "analytic", err, diag)
