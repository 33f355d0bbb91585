"""Where the serving RSU sits.

The nearest RSU is on the vehicle's own road with probability P[e0]; the
rest of the time it lies on another road, most often the nearest one. The
serving distance is shorter when roads are dense, because more roads offer
candidates.
"""

import numpy as np

from plprelay import McConfig, default_params, mc_distributions, prob_e0
from plprelay.distributions import pdf_serving_distance

params = default_params()
freq = mc_distributions(params, McConfig(drops=20_000, seed=2)).event_frequencies(max_rank=3)
print(f"P[own road]   analytic {prob_e0(params):.4f}   simulated {freq['e0']:.4f}")
for k in (1, 2, 3):
    print(f"P[rank-{k} road]                   simulated {freq[f'e{k}']:.4f}")

r = np.linspace(0.0, 3.0, 3001)
for rho in (0.5, 2.0, 8.0):
    f = pdf_serving_distance(params.with_(rho=rho), r)
    mean = np.sum(0.5 * (r[1:] * f[1:] + r[:-1] * f[:-1]) * np.diff(r))
    print(f"rho = {rho:>3}: mean serving distance {1000 * mean:6.1f} m")
