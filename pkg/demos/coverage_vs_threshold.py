"""Direct and relay coverage of a typical vehicle as the SINR threshold grows.

Direct coverage is the probability that the nearest RSU delivers SINR above
T. Relay coverage is the probability that a vehicle 100 m away forwards the
message successfully given the direct link was not used, with the relay
itself served by an RSU nearer than the typical vehicle's.
"""

from plprelay import default_params, relay_coverage, scenario_a_coverage

params = default_params()
print(f"{'T [dB]':>7} {'direct':>8} {'relay':>8}")
for tdb in range(-10, 11, 5):
    p = params.with_(threshold=10 ** (tdb / 10))
    print(f"{tdb:>7} {scenario_a_coverage(p).value:8.4f} {relay_coverage(0.1, p).value:8.4f}")
