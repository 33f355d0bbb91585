"""Compare the analytic coverage with a Monte Carlo estimate.

One simulated sample serves every threshold: the drop statistics (distances,
fading, interference sums) do not depend on T. The relay's own link comes
from a second, independent stream.
"""

from plprelay import McConfig, default_params, mc_relay, mc_scenario_a, relay_coverage, scenario_a_coverage, simulate

params = default_params()
cfg = McConfig(drops=40_000, seed=3)
main, relay_leg = simulate(params, cfg, 0), simulate(params, cfg, 1)

print(f"{'T [dB]':>7} {'direct':>8} {'mc':>15} {'relay':>8} {'mc':>15}")
for tdb in (-5, 0, 5):
    p = params.with_(threshold=10 ** (tdb / 10))
    a, a_mc = scenario_a_coverage(p), mc_scenario_a(p, cfg, sample=main)
    r, r_mc = relay_coverage(0.1, p), mc_relay(p, cfg, 0.1, sample=main, relay_sample=relay_leg).p_pipeline
    print(
        f"{tdb:>7} {a.value:8.4f} {a_mc.value:8.4f} ± {a_mc.error:.4f}"
        f" {r.value:8.4f} {r_mc.value:8.4f} ± {r_mc.error:.4f}"
    )
