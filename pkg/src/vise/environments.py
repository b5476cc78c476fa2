"""Proposal-generating environments.

Four continuous families generate the i.i.d. proposal components: continuous
uniform on [-a, b], normal, symmetrized Pareto and Laplace.  For each family
this module gives the density, CDF and quantile function, inverse-CDF
sampling, and the environment summary used by the voting formulas (p, q and
the conditional mean gain/loss E+ and E-).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import ClassVar, Mapping, Union

import numpy as np

from .numerics import (
    SQRT2,
    std_normal_cdf,
    std_normal_mills_ratio,
    std_normal_pdf,
    std_normal_quantile,
)

SQRT3 = math.sqrt(3.0)
LN2 = math.log(2.0)


class ParameterError(ValueError):
    """A distribution parameter violates its family's constraints."""


def pareto_c(k: float) -> float:
    """C = sqrt((k-1)(k-2)/2), the ratio of Pareto scale to standard deviation."""
    return math.sqrt((k - 1.0) * (k - 2.0) / 2.0)


def _scalar(out):
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


def _check_open_unit(u, bounded: bool):
    u = np.asarray(u, dtype=float)
    lo_bad = u < 0 if bounded else u <= 0
    hi_bad = u > 1 if bounded else u >= 1
    if np.any(lo_bad | hi_bad | np.isnan(u)):
        what = "[0, 1]" if bounded else "(0, 1) for an unbounded support"
        raise ValueError(f"quantile level must lie in {what}")
    return u


@dataclass(frozen=True)
class Uniform:
    """Continuous uniform proposals on [-a, b]."""

    a: float
    b: float
    family: ClassVar[str] = "uniform"

    @property
    def mean(self) -> float:
        return (self.b - self.a) / 2.0

    @property
    def std(self) -> float:
        return (self.a + self.b) / (2.0 * SQRT3)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= -self.a) & (x <= self.b)
        return _scalar(np.where(inside, 1.0 / (self.a + self.b), 0.0))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar(np.clip((x + self.a) / (self.a + self.b), 0.0, 1.0))

    def quantile(self, u):
        u = _check_open_unit(u, bounded=True)
        return _scalar(-self.a + u * (self.a + self.b))


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float
    family: ClassVar[str] = "normal"

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def std(self) -> float:
        return self.sigma

    def pdf(self, x):
        return _scalar(std_normal_pdf((np.asarray(x, dtype=float) - self.mu) / self.sigma) / self.sigma)

    def cdf(self, x):
        return _scalar(std_normal_cdf((np.asarray(x, dtype=float) - self.mu) / self.sigma))

    def quantile(self, u):
        u = _check_open_unit(u, bounded=False)
        return _scalar(self.mu + self.sigma * std_normal_quantile(u))


@dataclass(frozen=True)
class SymmetrizedPareto:
    """Pareto density halved and reflected about its mode ``mu``.

    Parameterised by shape ``k`` (> 2 for a finite variance), the mode/median
    ``mu`` and the standard deviation ``sigma``; the Pareto scale is
    ``C * sigma``.
    """

    k: float
    mu: float
    sigma: float
    family: ClassVar[str] = "pareto"

    @property
    def c(self) -> float:
        return pareto_c(self.k)

    @property
    def scale(self) -> float:
        return self.c * self.sigma

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def std(self) -> float:
        return self.sigma

    def pdf(self, x):
        a = self.scale
        z = np.abs(np.asarray(x, dtype=float) - self.mu) / a
        return _scalar(self.k / (2.0 * a) * (z + 1.0) ** (-(self.k + 1.0)))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        a = self.scale
        z = np.abs(x - self.mu) / a
        half_tail = 0.5 * (z + 1.0) ** (-self.k)
        return _scalar(np.where(x <= self.mu, half_tail, 1.0 - half_tail))

    def quantile(self, u):
        u = _check_open_unit(u, bounded=False)
        a = self.scale
        tail = np.minimum(u, 1.0 - u)
        dist = a * ((2.0 * tail) ** (-1.0 / self.k) - 1.0)
        return _scalar(np.where(u < 0.5, self.mu - dist, self.mu + dist))


@dataclass(frozen=True)
class Laplace:
    """Laplace proposals with location ``mu`` and rate ``lam`` (serialized as ``lambda``)."""

    mu: float
    lam: float
    family: ClassVar[str] = "laplace"

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def std(self) -> float:
        return SQRT2 / self.lam

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar(0.5 * self.lam * np.exp(-self.lam * np.abs(x - self.mu)))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        half_tail = 0.5 * np.exp(-self.lam * np.abs(x - self.mu))
        return _scalar(np.where(x <= self.mu, half_tail, 1.0 - half_tail))

    def quantile(self, u):
        u = _check_open_unit(u, bounded=False)
        tail = np.minimum(u, 1.0 - u)
        dist = -np.log(2.0 * tail) / self.lam
        return _scalar(np.where(u < 0.5, self.mu - dist, self.mu + dist))


DistributionSpec = Union[Uniform, Normal, SymmetrizedPareto, Laplace]
FAMILIES: dict[str, type] = {
    "uniform": Uniform,
    "normal": Normal,
    "pareto": SymmetrizedPareto,
    "laplace": Laplace,
}
FAMILY_ALIASES = {"symmetrized_pareto": "pareto", "symmetrizedpareto": "pareto", "gaussian": "normal"}


@dataclass(frozen=True)
class EnvironmentStats:
    """Summary of a proposal distribution.

    ``e_plus`` is E(zeta | zeta > 0) and ``e_minus`` is |E(zeta | zeta <= 0)|.
    ``c_const`` and ``rho_hat`` are only set for the symmetrized Pareto family.
    """

    mu: float
    sigma: float
    rho: float
    p: float
    q: float
    e_plus: float
    e_minus: float
    c_const: float | None = None
    rho_hat: float | None = None

    @property
    def ratio(self) -> float:
        """Win/loss magnitude ratio R = E+ / E-."""
        if self.e_minus == 0:
            raise ValueError("win/loss ratio undefined: E- is zero (no losing proposals)")
        return self.e_plus / self.e_minus

    @property
    def degenerate(self) -> bool:
        return self.p == 0.0 or self.q == 0.0


# -- validation --------------------------------------------------------------

def _finite(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ParameterError(f"{name} must be a finite real number, got {value!r}")


def validate(spec: DistributionSpec) -> DistributionSpec:
    """Return ``spec`` unchanged if its parameters are admissible."""
    if isinstance(spec, Uniform):
        _finite("a", spec.a)
        _finite("b", spec.b)
        if not spec.a > 0:
            raise ParameterError(f"a must be positive (support is [-a, b]), got a={spec.a}")
        if not spec.b > 0:
            raise ParameterError(f"b must be positive (support is [-a, b]), got b={spec.b}")
    elif isinstance(spec, Normal):
        _finite("mu", spec.mu)
        _finite("sigma", spec.sigma)
        if not spec.sigma > 0:
            raise ParameterError(f"sigma must be positive, got sigma={spec.sigma}")
    elif isinstance(spec, SymmetrizedPareto):
        _finite("k", spec.k)
        _finite("mu", spec.mu)
        _finite("sigma", spec.sigma)
        if not spec.k > 2:
            raise ParameterError(f"k must exceed 2 for a finite variance, got k={spec.k}")
        if not spec.sigma > 0:
            raise ParameterError(f"sigma must be positive, got sigma={spec.sigma}")
    elif isinstance(spec, Laplace):
        _finite("mu", spec.mu)
        _finite("lambda", spec.lam)
        if not spec.lam > 0:
            raise ParameterError(f"lambda (rate) must be positive, got lambda={spec.lam}")
    else:
        raise ParameterError(f"unsupported distribution spec {spec!r}")
    return spec


# -- environment statistics --------------------------------------------------

def _uniform_stats(s: Uniform) -> EnvironmentStats:
    w = s.a + s.b
    mu = (s.b - s.a) / 2.0
    sigma = w / (2.0 * SQRT3)
    p = s.b / w
    return EnvironmentStats(mu=mu, sigma=sigma, rho=mu / sigma, p=p, q=1.0 - p,
                            e_plus=s.b / 2.0, e_minus=s.a / 2.0)


def _normal_stats(s: Normal) -> EnvironmentStats:
    mu, sigma = s.mu, s.sigma
    rho = mu / sigma
    if rho > 0:
        q = float(std_normal_cdf(-rho))
        p = 1.0 - q
    else:
        p = float(std_normal_cdf(rho))
        q = 1.0 - p
    # f(rho)/F(rho) = 1/M(-rho) and f(rho)/F(-rho) = 1/M(rho), M the Mills ratio
    e_plus = mu + sigma / float(std_normal_mills_ratio(-rho))
    e_minus = -mu + sigma / float(std_normal_mills_ratio(rho))
    return EnvironmentStats(mu=mu, sigma=sigma, rho=rho, p=p, q=q, e_plus=e_plus, e_minus=e_minus)


def _pareto_stats(s: SymmetrizedPareto) -> EnvironmentStats:
    k, mu, sigma = s.k, s.mu, s.sigma
    c = pareto_c(k)
    rho = mu / sigma
    if mu > 0:
        q = 0.5 * (c / (c + rho)) ** k
        p = 1.0 - q
        e_minus = sigma * (c + rho) / (k - 1.0)
        e_plus = sigma / p * (rho + q * (c + rho) / (k - 1.0))
    else:
        p = 0.5 * (c / (c - rho)) ** k
        q = 1.0 - p
        e_plus = sigma * (c - rho) / (k - 1.0)
        e_minus = -sigma / q * (rho - p * (c - rho) / (k - 1.0))
    return EnvironmentStats(mu=mu, sigma=sigma, rho=rho, p=p, q=q, e_plus=e_plus, e_minus=e_minus,
                            c_const=c, rho_hat=abs(rho / c))


def _laplace_stats(s: Laplace) -> EnvironmentStats:
    mu, lam = s.mu, s.lam
    sigma = SQRT2 / lam
    if mu > 0:
        tail = math.exp(-lam * mu)
        q = 0.5 * tail
        p = 1.0 - q
        e_minus = 1.0 / lam
        e_plus = (mu + tail / (2.0 * lam)) / p
    else:
        tail = math.exp(lam * mu)
        p = 0.5 * tail
        q = 1.0 - p
        e_plus = 1.0 / lam
        e_minus = -(mu - tail / (2.0 * lam)) / q
    return EnvironmentStats(mu=mu, sigma=sigma, rho=mu / sigma, p=p, q=q, e_plus=e_plus, e_minus=e_minus)


_STATS = {Uniform: _uniform_stats, Normal: _normal_stats,
          SymmetrizedPareto: _pareto_stats, Laplace: _laplace_stats}


def stats(spec: DistributionSpec) -> EnvironmentStats:
    """Closed-form p, q, E+, E- (and mu, sigma, rho) for ``spec``."""
    validate(spec)
    return _STATS[type(spec)](spec)


# -- distribution functions --------------------------------------------------

def pdf(spec: DistributionSpec, x):
    return spec.pdf(x)


def cdf(spec: DistributionSpec, x):
    return spec.cdf(x)


def quantile(spec: DistributionSpec, u):
    return spec.quantile(u)


def sample(spec: DistributionSpec, stream) -> float:
    """One proposal component: the quantile of the stream's next uniform variate."""
    return float(spec.quantile(stream.uniform()))


def first_quartile(spec: DistributionSpec) -> float:
    return float(spec.quantile(0.25))


def standardize_by_quartile(family: str, reference_q1_offset: float, *, k: float | None = None) -> DistributionSpec:
    """Zero-mean spec of ``family`` whose first quartile sits at ``reference_q1_offset``.

    The offset is Q1 - mu of the reference distribution, e.g.
    ``first_quartile(Normal(0, 1))``.
    """
    family = normalize_family(family)
    if not reference_q1_offset < 0:
        raise ParameterError(f"reference first-quartile offset must be negative, got {reference_q1_offset}")
    d = -reference_q1_offset
    if family == "uniform":
        half_width = 2.0 * d  # Q1 sits a quarter of the way along [-a, a]
        return Uniform(a=half_width, b=half_width)
    if family == "normal":
        return Normal(mu=0.0, sigma=d / -float(std_normal_quantile(0.25)))
    if family == "pareto":
        if k is None:
            raise ParameterError("symmetrized Pareto standardization needs the shape k")
        validate(SymmetrizedPareto(k=k, mu=0.0, sigma=1.0))
        return SymmetrizedPareto(k=k, mu=0.0, sigma=d / (pareto_c(k) * (2.0 ** (1.0 / k) - 1.0)))
    if family == "laplace":
        return Laplace(mu=0.0, lam=LN2 / d)
    raise ParameterError(f"unsupported family {family!r}")


# -- family sweeps -----------------------------------------------------------

@dataclass(frozen=True)
class FamilySweep:
    """A family with its shape held fixed while the mean moves.

    ``sigma`` is the standard deviation kept constant along the sweep (for the
    uniform family this fixes the width a + b = 2*sqrt(3)*sigma); ``k`` is the
    Pareto shape.
    """

    family: str
    sigma: float = 1.0
    k: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", normalize_family(self.family))
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got sigma={self.sigma}")
        if self.family == "pareto":
            if self.k is None:
                raise ParameterError("symmetrized Pareto sweep needs the shape k")
            if not self.k > 2:
                raise ParameterError(f"k must exceed 2 for a finite variance, got k={self.k}")

    def spec_at_mu(self, mu: float) -> DistributionSpec:
        if self.family == "uniform":
            half = SQRT3 * self.sigma
            return validate(Uniform(a=half - mu, b=half + mu))
        if self.family == "normal":
            return Normal(mu=mu, sigma=self.sigma)
        if self.family == "pareto":
            return SymmetrizedPareto(k=self.k, mu=mu, sigma=self.sigma)
        return Laplace(mu=mu, lam=SQRT2 / self.sigma)

    def spec_at_rho(self, rho: float) -> DistributionSpec:
        return self.spec_at_mu(rho * self.sigma)

    def stats_at_mu(self, mu: float) -> EnvironmentStats:
        """Environment stats, including the one-signed uniform cases |rho| >= sqrt(3).

        When the uniform support no longer straddles zero every component has
        the same sign; p (or q) is then exactly 0 and the empty conditional
        mean is reported as 0.
        """
        if self.family == "uniform":
            rho = mu / self.sigma
            if rho >= SQRT3:
                return EnvironmentStats(mu=mu, sigma=self.sigma, rho=rho, p=1.0, q=0.0, e_plus=mu, e_minus=0.0)
            if rho <= -SQRT3:
                return EnvironmentStats(mu=mu, sigma=self.sigma, rho=rho, p=0.0, q=1.0, e_plus=0.0, e_minus=-mu)
        return stats(self.spec_at_mu(mu))

    def stats_at_rho(self, rho: float) -> EnvironmentStats:
        return self.stats_at_mu(rho * self.sigma)


# -- serialization -----------------------------------------------------------

def normalize_family(tag: str) -> str:
    t = str(tag).strip().lower().replace("-", "_")
    t = FAMILY_ALIASES.get(t, t)
    if t not in FAMILIES:
        raise ParameterError(f"unsupported family {tag!r}; expected one of {', '.join(FAMILIES)}")
    return t


_FIELDS = {
    "uniform": ("a", "b"),
    "normal": ("mu", "sigma"),
    "pareto": ("k", "mu", "sigma"),
    "laplace": ("mu", "lambda"),
}


def spec_to_dict(spec: DistributionSpec) -> dict:
    d = {"family": spec.family}
    for name in _FIELDS[spec.family]:
        d[name] = getattr(spec, "lam" if name == "lambda" else name)
    return d


def spec_from_dict(data: Mapping) -> DistributionSpec:
    data = dict(data)
    if "family" not in data:
        raise ParameterError("distribution spec needs a 'family' field")
    family = normalize_family(data.pop("family"))
    names = _FIELDS[family]
    unknown = set(data) - set(names)
    if unknown:
        raise ParameterError(f"unknown field(s) for {family}: {', '.join(sorted(unknown))}")
    missing = [n for n in names if n not in data]
    if missing:
        raise ParameterError(f"missing field(s) for {family}: {', '.join(missing)}")
    kwargs = {}
    for name in names:
        try:
            value = float(data[name])
        except (TypeError, ValueError):
            raise ParameterError(f"{name} must be a real number, got {data[name]!r}") from None
        kwargs["lam" if name == "lambda" else name] = value
    return validate(FAMILIES[family](**kwargs))


def spec_to_text(spec: DistributionSpec) -> str:
    return " ".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in spec_to_dict(spec).items())


def parse_spec(text: str) -> DistributionSpec:
    """Parse ``"family=normal mu=0.5 sigma=1.0"`` or the equivalent JSON object."""
    text = text.strip()
    if text.startswith("{"):
        return spec_from_dict(json.loads(text))
    data = {}
    for token in text.replace(",", " ").split():
        if "=" not in token:
            raise ParameterError(f"expected key=value, got {token!r}")
        key, value = token.split("=", 1)
        data[key.strip()] = value.strip()
    return spec_from_dict(data)
