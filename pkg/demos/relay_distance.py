"""How the relay's distance from the typical vehicle trades the two hops.

A nearer relay gives a stronger vehicle-to-vehicle link (xi1 grows), but the
relay must also be covered by an RSU closer than the typical vehicle's own
(xi2), and the direct link must have failed or had its RSU within r1 (xi3).
"""

from plprelay import default_params, relay_coverage

params = default_params()
print(f"{'r1 [km]':>8} {'xi1':>8} {'xi2':>8} {'xi3':>8} {'relay':>8}")
for r1 in (0.02, 0.05, 0.1, 0.2, 0.4):
    est = relay_coverage(r1, params)
    d = est.diagnostics
    print(f"{r1:>8g} {d['xi1']:8.4f} {d['xi2']:8.4f} {d['xi3']:8.4f} {est.value:8.4f}")
