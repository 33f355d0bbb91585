"""Independent scipy-quad implementations of the interference transforms.

Written directly from the per-road probability generating functional with
plain nested ``scipy.integrate.quad``; slow but structurally unrelated to the
vectorized package code.
"""

import math

from scipy import integrate


def quad(f, a, b, **kw):
    kw.setdefault("limit", 200)
    kw.setdefault("epsabs", 1e-12)
    kw.setdefault("epsrel", 1e-10)
    return integrate.quad(f, a, b, **kw)[0]


def zeta(d2, s_a, s_b, p):
    a = p.mu * d2 ** (0.5 * p.eta)
    return 1.0 - a / (a + s_a) * a / (a + s_b)


def road_integral(c, u, s_a, s_b, p):
    """int_c^inf zeta(x, u) dx: one side of a road at distance u beyond abscissa c."""
    scale = max(c, u, ((s_a + s_b) / p.mu) ** (1 / p.eta), 1e-3)
    return quad(lambda x: zeta(x * x + u * u, s_a, s_b, p), c, c + scale) + quad(
        lambda x: zeta(x * x + u * u, s_a, s_b, p), c + scale, math.inf
    )


def chord(r, u):
    return math.sqrt(max(r * r - u * u, 0.0))


def log_own_road(r, s_a, s_b, p, lam):
    return -2.0 * lam * road_integral(r, 0.0, s_a, s_b, p)


def log_far_roads(r, s_a, s_b, p, lam):
    """Roads at distance u > r: every point interferes."""
    f = lambda u: 1.0 - math.exp(-2.0 * lam * road_integral(0.0, u, s_a, s_b, p))
    return -2.0 * p.rho * (quad(f, r, r + 1.0) + quad(f, r + 1.0, math.inf))


def log_unconditioned(s_a, s_b, p, lam):
    return log_own_road(0.0, s_a, s_b, p, lam) + log_far_roads(0.0, s_a, s_b, p, lam)


def _void_weighted(u, r, s_a, s_b, p):
    # P[road at u void inside b(o, r)] * E[its factor | void]
    c = chord(r, u)
    return math.exp(-2.0 * p.lambda_ru * c) * math.exp(-2.0 * p.lambda_ru * road_integral(c, u, s_a, s_b, p))


def log_disk_roads(lo, hi, r, s_a, s_b, p):
    """Poisson roads at u in (lo, hi) conditioned void inside b(o, r)."""
    f = lambda u: math.exp(-2.0 * p.lambda_ru * chord(r, u)) - _void_weighted(u, r, s_a, s_b, p)
    return -2.0 * p.rho * quad(f, lo, hi)


def nearer_road_ratio(y, r, s_a, s_b, p):
    """E[factor | void] for one road uniform on (0, y) conditioned void inside b(o, r)."""
    num = quad(lambda u: _void_weighted(u, r, s_a, s_b, p), 0.0, y)
    den = quad(lambda u: math.exp(-2.0 * p.lambda_ru * chord(r, u)), 0.0, y)
    return num / den
