"""Coverage of vehicles on Poisson-line road networks with roadside units and one-hop relays.

The analytic pipeline (:mod:`plprelay.coverage`) evaluates coverage
probabilities by quadrature over the serving configuration; the simulator
(:mod:`plprelay.montecarlo`) estimates the same quantities from sampled
networks; :mod:`plprelay.validation` compares the two.
"""

from .coverage import (
    CoverageError,
    CoverageEstimate,
    CoverageWarning,
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
from .distributions import ServingEvent, prob_e0, prob_en_given_yn
from .geometry import NetworkRealization, NoRsuError, nearest_rsu, sample_realization, serving_event
from .laplace import Conditioning, InterferenceComponent, joint_lt, joint_lt_own_line, single_lt, zeta2
from .model import ModelParams, SinrScales, db_to_linear, default_params, derive_scales
from .montecarlo import McConfig, McError, mc_distributions, mc_laplace, mc_relay, mc_scenario_a, simulate
from .quadrature import IntegrationError, QuadratureSpec

__version__ = "0.1.0"

__all__ = [
    "CoverageError",
    "CoverageEstimate",
    "CoverageWarning",
    "Conditioning",
    "IntegrationError",
    "InterferenceComponent",
    "McConfig",
    "McError",
    "ModelParams",
    "NetworkRealization",
    "NoRsuError",
    "QuadratureSpec",
    "ServingEvent",
    "SinrScales",
    "db_to_linear",
    "default_params",
    "derive_scales",
    "joint_lt",
    "joint_lt_own_line",
    "mc_distributions",
    "mc_laplace",
    "mc_relay",
    "mc_scenario_a",
    "nearest_rsu",
    "pc1_a",
    "pc1_ab",
    "pc2_a",
    "pc2_ab",
    "prob_e0",
    "prob_en_given_yn",
    "relay_coverage",
    "relay_link_coverage",
    "sample_realization",
    "scenario_a_coverage",
    "serving_event",
    "simulate",
    "single_lt",
    "xi1",
    "xi2",
    "xi3",
    "zeta2",
]
