"""Special functions and combinatorial primitives.

Everything here is a pure function.  Binomial weights are accumulated in log
space and summed with ``math.fsum`` so that tails at n in the low hundreds keep
full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
LOG_SQRT2PI = 0.5 * math.log(2.0 * math.pi)

_CF_MAX_ITER = 10_000
_CF_EPS = 1e-16
_FPMIN = 1e-300
_EXACT_COMB_LIMIT = 1000


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")


DEFAULT_TOLERANCE = Tolerance()


# -- standard normal ---------------------------------------------------------

def std_normal_pdf(x):
    """Standard normal density; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / SQRT2PI
    return out[()] if out.ndim == 0 else out


def std_normal_cdf(x):
    """Standard normal CDF via ``erfc``, accurate in both tails."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(-x / SQRT2)
    return out[()] if out.ndim == 0 else out


def std_normal_mills_ratio(x):
    """Return F(-x) / f(x) without under/overflow for large |x|."""
    x = np.asarray(x, dtype=float)
    out = math.sqrt(math.pi / 2.0) * special.erfcx(x / SQRT2)
    return out[()] if out.ndim == 0 else out


def std_normal_quantile(u):
    u = np.asarray(u, dtype=float)
    out = special.ndtri(u)
    return out[()] if out.ndim == 0 else out


# -- combinatorics -----------------------------------------------------------

def log_binomial_coefficient(n: int, k: int) -> float:
    """ln C(n, k); ``-inf`` when k lies outside [0, n]."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if k < 0 or k > n:
        return -math.inf
    if n <= _EXACT_COMB_LIMIT:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def log_beta_function(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise ValueError(f"beta function needs a > 0 and b > 0, got a={a}, b={b}")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def xlog(x: float, logy: float) -> float:
    """x * logy with the 0 * (-inf) = 0 convention."""
    return 0.0 if x == 0 else x * logy


def log_pq(p: float, q: float | None = None) -> tuple[float, float]:
    """Return (ln p, ln q) for q = 1 - p, using log1p on the larger side."""
    if q is None:
        q = 1.0 - p
    lp = math.log1p(-q) if p > 0.5 else (math.log(p) if p > 0 else -math.inf)
    lq = math.log1p(-p) if q > 0.5 else (math.log(q) if q > 0 else -math.inf)
    return lp, lq


def binomial_log_pmf(x: int, n: int, log_p: float, log_q: float) -> float:
    return log_binomial_coefficient(n, x) + xlog(x, log_p) + xlog(n - x, log_q)


# -- incomplete beta ---------------------------------------------------------

def _stirling_delta(a: float) -> float:
    """Remainder lnGamma(a) - [(a - 1/2) ln a - a + ln sqrt(2 pi)]."""
    if a >= 10.0:
        r = 1.0 / a
        r2 = r * r
        return r * (1 / 12 - r2 * (1 / 360 - r2 * (1 / 1260 - r2 * (1 / 1680 - r2 * (1 / 1188 - r2 * 691 / 360360)))))
    return math.lgamma(a) - ((a - 0.5) * math.log(a) - a + LOG_SQRT2PI)


def _rlog1(t: float) -> float:
    """ln(1 + t) - t for |t| <= 1/2, without cancellation near t = 0."""
    r = t / (2.0 + t)
    r2 = r * r
    # ln(1+t) = 2 atanh(r); subtracting t leaves -r*t + 2r(r^2/3 + r^4/5 + ...)
    s = 0.0
    term = r2
    j = 3
    while term > 0.0:
        inc = term / j
        s += inc
        if inc <= 1e-18 * s:
            break
        term *= r2
        j += 2
    return -r * t + 2.0 * r * s


def _scaled_log_ratio(z: float, c: float, s: float) -> float:
    """c * [ln(z/z0) - (z/z0 - 1)] with z0 = c/s."""
    t = (s * z - c) / c
    if abs(t) <= 0.5:
        return c * _rlog1(t)
    return c * (math.log(z) - math.log(c / s) - t)


def _log_beta_front(x: float, y: float, a: float, b: float) -> float:
    """ln[x^a y^b / B(a, b)] with the large-parameter cancellation removed.

    The linear parts a*t1 + b*t2 cancel exactly because x + y = 1, which
    leaves only second-order terms and a Stirling-corrected constant.
    """
    s = a + b
    if x == 0.0 or y == 0.0:
        return -math.inf
    core = _scaled_log_ratio(x, a, s) + _scaled_log_ratio(y, b, s)
    return core + 0.5 * math.log(a * b / (2.0 * math.pi * s)) - (
        _stirling_delta(a) + _stirling_delta(b) - _stirling_delta(s)
    )


def _beta_cf(x: float, a: float, b: float) -> float:
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def ibeta(x: float, y: float, a: float, b: float) -> float:
    """I_x(a, b) given both x and its complement y = 1 - x.

    Passing ``y`` explicitly avoids forming 1 - x when the caller already
    holds an accurate complement (e.g. q = P{zeta <= 0}).
    """
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    if x > (a + 1.0) / (a + b + 2.0):
        return 1.0 - ibeta(y, x, b, a)
    front = math.exp(_log_beta_front(x, y, a, b))
    return front * _beta_cf(x, a, b) / a


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if not (a > 0 and b > 0):
        raise ValueError(f"incomplete beta needs a > 0 and b > 0, got a={a}, b={b}")
    return ibeta(x, 1.0 - x, a, b)


def beta_cdf(x: float, a: float, b: float, *, y: float | None = None) -> float:
    """CDF of the Beta(a, b) distribution, B(x | a, b)."""
    if y is None:
        return regularized_incomplete_beta(x, a, b)
    return ibeta(x, y, a, b)


def binomial_upper_tail(n: int, p: float, k: int, *, q: float | None = None) -> float:
    """G_n(k) = P{Y > k} for Y ~ Bin(n, p).

    Equals 1 for k < 0 and 0 for k >= n; otherwise the Beta CDF
    B(p | k + 1, n - k).
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if k < 0:
        return 1.0
    if k >= n:
        return 0.0
    if q is None:
        q = 1.0 - p
    return ibeta(p, q, k + 1, n - k)


# -- quadrature --------------------------------------------------------------

def adaptive_quadrature(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOLERANCE,
    breakpoints: Sequence[float] = (),
) -> float:
    """Integrate ``f`` over (lo, hi); infinite endpoints are allowed.

    Interior ``breakpoints`` (kinks of piecewise integrands) split the range
    into independently integrated pieces.  Raises :class:`QuadratureError`
    when a piece exhausts ``tol.max_iter`` subdivisions.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    cuts = [lo] + sorted(c for c in breakpoints if lo < c < hi) + [hi]
    total = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        out = integrate.quad(
            f, a, b, epsabs=tol.abs_tol, epsrel=tol.rel_tol, limit=tol.max_iter, full_output=1
        )
        val, err = out[0], out[1]
        # a fourth element (the QUADPACK message) is present only when ier != 0
        if len(out) > 3 and err > max(tol.abs_tol, tol.rel_tol * abs(val)):
            raise QuadratureError(
                f"no convergence on ({a}, {b}) within {tol.max_iter} subdivisions "
                f"(error estimate {err:.3g}): {out[3].splitlines()[0]}"
            )
        total.append(val)
    return math.fsum(total)
