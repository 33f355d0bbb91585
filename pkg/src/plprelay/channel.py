"""Path loss, Rayleigh fading and the SINR of the three links.

``sinr_a``   RSU -> typical vehicle at the origin (direct link).
``sinr_b``   relay vehicle at distance r1 -> typical vehicle.
``sinr_rel`` RSU -> relay vehicle.

Received power is ``P g d^-eta`` with ``P = kappa`` for RSUs and ``nu`` for
vehicles, and ``g ~ Exp(mu)`` drawn independently per point and per epoch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import NetworkRealization, NoRsuError, make_rng
from .model import ModelParams

__all__ = ["FadingEpoch", "draw_epoch", "sinr_a", "sinr_b", "sinr_rel", "received_power"]


@dataclass(frozen=True, eq=False)
class FadingEpoch:
    """Fading marks of one transmission epoch on a fixed realization.

    ``rsu`` and ``veh`` hold one array per line, aligned with the point lists
    of the realization. ``link`` is the mark of the vehicle-to-vehicle relay
    link (used by :func:`sinr_b`).
    """

    rsu: tuple
    veh: tuple
    link: float = 1.0

    def __post_init__(self):
        for arr in (*self.rsu, *self.veh):
            if np.any(np.asarray(arr) < 0):
                raise ValueError("fading marks must be >= 0")


def draw_epoch(real: NetworkRealization, params: ModelParams, seed) -> FadingEpoch:
    """Independent Exp(mu) marks for every point of ``real`` plus the relay link."""
    rng = make_rng(seed)
    scale = 1.0 / params.mu
    rsu = tuple(rng.exponential(scale, len(a)) for a in real.rsus_per_line)
    veh = tuple(rng.exponential(scale, len(a)) for a in real.tx_vehicles_per_line)
    return FadingEpoch(rsu, veh, float(rng.exponential(scale)))


def received_power(power, marks, d, eta):
    return power * np.asarray(marks) * np.asarray(d, dtype=float) ** (-eta)


def _distances(real, per_line, point):
    idx, t, xy = (real.rsu_points() if per_line == "rsu" else real.vehicle_points())
    d = np.sqrt(np.sum((xy - np.asarray(point, dtype=float)) ** 2, axis=1))
    return idx, t, d


def _flat_marks(marks):
    return np.concatenate([np.asarray(m, dtype=float) for m in marks] or [np.zeros(0)])


def _vehicle_interference(real, params, epoch, point):
    _, _, d = _distances(real, "veh", point)
    return float(np.sum(received_power(params.nu, _flat_marks(epoch.veh), d, params.eta)))


def _served(real, params, epoch, point, extra_noise):
    idx, t, d = _distances(real, "rsu", point)
    if d.size == 0:
        raise NoRsuError("no RSU in the simulation window; enlarge window_radius")
    g = _flat_marks(epoch.rsu)
    j = np.lexsort((t, idx, d))[0]
    p = received_power(params.kappa, g, d, params.eta)
    # sum the others directly: total - p[j] cancels when the server dominates
    interference = float(np.sum(np.delete(p, j))) + _vehicle_interference(real, params, epoch, point)
    return float(p[j]) / (params.noise + extra_noise + interference)


def sinr_a(real: NetworkRealization, params: ModelParams, epoch: FadingEpoch, extra_noise: float = 0.0) -> float:
    """SINR at the origin from the nearest RSU; all other RSUs and vehicles interfere.

    ``extra_noise`` adds a deterministic power to the noise (e.g. the mean
    interference from outside the simulation window).
    """
    return _served(real, params, epoch, (0.0, 0.0), extra_noise)


def sinr_b(
    real: NetworkRealization, params: ModelParams, epoch: FadingEpoch, r1: float, extra_noise: float = 0.0
) -> float:
    """SINR at the origin from a relay vehicle at distance r1 (mark ``epoch.link``).

    Every RSU interferes, as do all transmitting vehicles of the realization
    (the relay itself is an added point, not one of them).
    """
    if not r1 > 0:
        raise ValueError("r1 must be > 0")
    _, _, d = _distances(real, "rsu", (0.0, 0.0))
    rsu = float(np.sum(received_power(params.kappa, _flat_marks(epoch.rsu), d, params.eta)))
    veh = _vehicle_interference(real, params, epoch, (0.0, 0.0))
    signal = params.nu * epoch.link * r1 ** (-params.eta)
    return signal / (params.noise + extra_noise + rsu + veh)


def sinr_rel(
    real: NetworkRealization,
    params: ModelParams,
    epoch: FadingEpoch,
    relay_point,
    extra_noise: float = 0.0,
) -> float:
    """SINR at ``relay_point`` from its own nearest RSU; same form as :func:`sinr_a`."""
    return _served(real, params, epoch, relay_point, extra_noise)
