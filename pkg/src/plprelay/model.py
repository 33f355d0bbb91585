"""Network parameters and the Laplace-argument scales shared by all modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

__all__ = ["ModelParams", "SinrScales", "derive_scales", "default_params", "db_to_linear"]


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ModelParams:
    """Physical and statistical parameters of the road/RSU/vehicle model.

    Distances are in km, linear densities per km and powers in one common
    linear unit (only ratios enter the SINR). ``threshold`` is linear, not dB.

    Attributes
    ----------
    rho : float
        Line density of the road process.
    lambda_ru, lambda_v : float
        RSU and vehicle densities along every road.
    p1 : float
        Probability that a vehicle is transmitting.
    mu : float
        Rate of the exponential fading power (mean ``1/mu``).
    eta : float
        Path-loss exponent; > 2 is needed for the cross-road interference
        integrals to converge.
    threshold : float
        SINR threshold T.
    noise, kappa, nu : float
        Thermal noise, RSU transmit power and vehicle transmit power.
    """

    rho: float = 2.0
    lambda_ru: float = 2.0
    lambda_v: float = 10.0
    p1: float = 0.2
    mu: float = 1.0
    eta: float = 4.0
    threshold: float = 1.0
    noise: float = 0.0
    kappa: float = 1.0
    nu: float = 0.1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{f.name} must be a finite number, got {v!r}")
        if self.rho <= 0:
            raise ValueError("rho must be > 0")
        if self.lambda_ru <= 0:
            raise ValueError("lambda_ru must be > 0")
        if self.lambda_v < 0:
            raise ValueError("lambda_v must be >= 0")
        if not 0.0 <= self.p1 <= 1.0:
            raise ValueError("p1 must lie in [0, 1]")
        if self.mu <= 0:
            raise ValueError("mu must be > 0")
        if self.eta <= 2:
            raise ValueError("eta must be > 2 for the cross-road interference to be finite")
        if self.threshold <= 0:
            raise ValueError("threshold must be > 0")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if self.kappa <= 0 or self.nu <= 0:
            raise ValueError("kappa and nu must be > 0")

    @property
    def lambda_l(self) -> float:
        """Density of the line process on its (angle, distance) parameter space."""
        return self.rho / math.pi

    @property
    def lambda_vt(self) -> float:
        """Linear density of transmitting vehicles after thinning."""
        return self.p1 * self.lambda_v

    @property
    def threshold_db(self) -> float:
        return 10.0 * math.log10(self.threshold)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class SinrScales:
    """Laplace arguments of the three links.

    ``s3, s4``: relay vehicle <- its nearest RSU at r0 (RSU / vehicle
    interference). ``s5, s6``: typical vehicle <- relay at r1. ``s7, s8``:
    typical vehicle <- its nearest RSU at rb1.
    """

    s3: float
    s4: float
    s5: float
    s6: float
    s7: float
    s8: float


def derive_scales(params: ModelParams, r0: float, r1: float, rb1: float) -> SinrScales:
    """Laplace arguments for a relay at ``r1``, serving distances ``rb1`` and ``r0``."""
    if r0 < 0:
        raise ValueError("r0 must be >= 0")
    if r1 <= 0:
        raise ValueError("r1 must be > 0")
    if rb1 <= r1:
        raise ValueError("rb1 must exceed r1: relaying is only used beyond the relay distance")
    m = params.mu * params.threshold
    eta = params.eta
    ratio = params.nu / params.kappa
    return SinrScales(
        s3=m * r0**eta,
        s4=ratio * m * r0**eta,
        s5=m * r1**eta / ratio,
        s6=m * r1**eta,
        s7=m * rb1**eta,
        s8=ratio * m * rb1**eta,
    )


def default_params() -> ModelParams:
    """Default parameter set.

    rho = lambda_ru = 2 /km, lambda_v = 10 /km, p1 = 0.2, eta = 4, mu = 1,
    kappa/nu = 10, T = 0 dB. The noise power puts the median received SNR
    (median fading power ln 2 / mu) at 10 dB for an RSU 0.25 km away.
    """
    kappa, eta, mu = 1.0, 4.0, 1.0
    noise = kappa * (math.log(2.0) / mu) * 0.25 ** (-eta) / db_to_linear(10.0)
    return ModelParams(
        rho=2.0,
        lambda_ru=2.0,
        lambda_v=10.0,
        p1=0.2,
        mu=mu,
        eta=eta,
        threshold=1.0,
        noise=noise,
        kappa=kappa,
        nu=0.1,
    )
