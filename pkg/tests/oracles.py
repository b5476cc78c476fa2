"""Independent reference computations used by several test modules.

Nothing here calls the closed forms under test: conditional means come from
direct numerical integration of the density, and the expected increment from
exhaustive enumeration.
"""

import itertools
import math

import mpmath
from scipy import integrate


def _quad(f, lo, hi):
    val, err = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=500)
    assert err < 1e-10, (lo, hi, err)
    return val


def conditional_means(spec):
    """(p, E+, E-) by quadrature of the density, split at 0 and the mode."""
    mu = spec.mean
    lo, hi = (-spec.a, spec.b) if spec.family == "uniform" else (-math.inf, math.inf)
    pos_cuts = sorted({0.0, max(mu, 0.0)})
    neg_cuts = sorted({0.0, min(mu, 0.0)})

    def pieces(cuts, a, b, f):
        pts = [a] + [c for c in cuts if a < c < b] + [b]
        return math.fsum(_quad(f, u, v) for u, v in zip(pts[:-1], pts[1:]) if v > u)

    def dens(x):
        return float(spec.pdf(x))

    def first(x):
        return x * float(spec.pdf(x))

    p = pieces(pos_cuts, 0.0, hi, dens)
    q = pieces(neg_cuts, lo, 0.0, dens)
    e_plus = pieces(pos_cuts, 0.0, hi, first) / p
    e_minus = -pieces(neg_cuts, lo, 0.0, first) / q
    return p, e_plus, e_minus


def enumerated_increment(st, n, n0):
    """E(eta) by summing over all 2^n sign patterns of the proposal.

    Given a pattern with x positive components the accepted agent-1 increment
    has conditional mean E+ (positive) or -E- (non-positive).
    """
    total = 0.0
    for signs in itertools.product((True, False), repeat=n):
        x = sum(signs)
        if x <= n0:
            continue
        prob = st.p**x * st.q ** (n - x)
        total += prob * (st.e_plus if signs[0] else -st.e_minus)
    return total


def mp_expected_increment(st, n, n0, dps=60):
    """Sum form evaluated in high-precision arithmetic."""
    with mpmath.workdps(dps):
        p, q = mpmath.mpf(st.p), mpmath.mpf(st.q)
        ep, em = mpmath.mpf(st.e_plus), mpmath.mpf(st.e_minus)
        return mpmath.fsum(
            ((ep + em) * x / n - em) * mpmath.binomial(n, x) * p**x * q ** (n - x)
            for x in range(n0 + 1, n + 1)
        )
