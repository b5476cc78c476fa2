"""alpha-majority voting: acceptance rule, expected increments, optimal thresholds.

A proposal is accepted when the number of agents with a strictly positive
component exceeds alpha*n, i.e. is at least n0 + 1 with n0 = floor(alpha*n).
The expected increment of one agent has three equivalent analytic forms: the
binomial sum, a Beta-CDF form and a regularized-incomplete-beta form.  The
welfare-maximizing relative threshold is E- / (E+ + E-).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .environments import (
    SQRT3,
    DistributionSpec,
    EnvironmentStats,
    FamilySweep,
    pareto_c,
    validate,
)
from .numerics import (
    SQRT2,
    binomial_log_pmf,
    binomial_upper_tail,
    ibeta,
    log_beta_function,
    log_pq,
    std_normal_cdf,
    std_normal_mills_ratio,
    xlog,
)

# alpha*n within this relative distance of an integer is taken as that integer,
# so that e.g. alpha = 11/21 yields n0 = 11 despite binary rounding
_SNAP = 1e-9


class DegenerateEnvironmentError(ValueError):
    """The environment never (p = 0) or always (p = 1) proposes gains.

    The ratio E+/E- is undefined; ``policy`` names the welfare-maximizing pure
    rule ("reject_all" or "accept_all") and ``alpha0`` its relative threshold.
    """

    def __init__(self, policy: str, alpha0: float):
        self.policy = policy
        self.alpha0 = alpha0
        super().__init__(f"degenerate environment: optimal policy is {policy} (alpha0 = {alpha0})")


def absolute_threshold(alpha: float, n: int) -> int:
    """n0 = floor(alpha * n)."""
    x = alpha * n
    r = round(x)
    if abs(x - r) <= _SNAP * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


@dataclass(frozen=True)
class VotingRule:
    n: int
    alpha: float
    n0: int = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"society size n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        lo = -1.0 / self.n
        if not (lo - _SNAP <= self.alpha <= 1.0 + _SNAP):
            raise ValueError(f"alpha must lie in [-1/n, 1] = [{lo:.6g}, 1], got {self.alpha}")
        object.__setattr__(self, "n0", absolute_threshold(self.alpha, self.n))

    @classmethod
    def from_n0(cls, n: int, n0: int) -> "VotingRule":
        if not -1 <= n0 <= n:
            raise ValueError(f"n0 must lie in [-1, n], got {n0}")
        return cls(n=n, alpha=n0 / n)

    def accepts(self, positive_count: int) -> bool:
        return positive_count > self.n0


def indicator(proposal: Sequence[float], rule: VotingRule) -> int:
    """1 when more than alpha*n components are strictly positive, else 0."""
    proposal = np.asarray(proposal, dtype=float)
    if proposal.shape != (rule.n,):
        raise ValueError(f"proposal must have length n={rule.n}, got shape {proposal.shape}")
    return int(rule.accepts(int(np.count_nonzero(proposal > 0))))


# -- expected increment ------------------------------------------------------

def _check_n0(n: int, n0: int, lo: int = -1, hi: int | None = None) -> None:
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    hi = n if hi is None else hi
    if not lo <= n0 <= hi:
        raise ValueError(f"n0 must lie in [{lo}, {hi}] for n={n}, got {n0}")


def _coefficient(st: EnvironmentStats, x: int, n: int) -> float:
    """Conditional expected increment given x positive components: (E+ + E-) x/n - E-."""
    return (st.e_plus + st.e_minus) * x / n - st.e_minus


def expected_increment_sum(st: EnvironmentStats, n: int, n0: int) -> float:
    """Binomial-sum form of the expected increment of one agent."""
    _check_n0(n, n0)
    if n0 == -1:
        return st.mu
    if n0 == n:
        return 0.0
    lp, lq = log_pq(st.p, st.q)
    return math.fsum(
        _coefficient(st, x, n) * math.exp(binomial_log_pmf(x, n, lp, lq)) for x in range(n0 + 1, n + 1)
    )


def expected_increment_zero_threshold(st: EnvironmentStats, n: int) -> float:
    """Expected increment at n0 = 0: mu + E- q^n."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return st.mu + st.e_minus * st.q ** n


def expected_increment_beta(st: EnvironmentStats, n: int, n0: int) -> float:
    """Beta-CDF form, valid for 1 <= n0 <= n - 1."""
    _check_n0(n, n0, 1, n - 1)
    p, q = st.p, st.q
    return (p * (st.e_plus + st.e_minus) * ibeta(p, q, n0, n - n0)
            - st.e_minus * ibeta(p, q, n0 + 1, n - n0))


def expected_increment_incomplete_beta(st: EnvironmentStats, n: int, n0: int) -> float:
    """Regularized-incomplete-beta form, valid for 1 <= n0 <= n - 1."""
    _check_n0(n, n0, 1, n - 1)
    lp, lq = log_pq(st.p, st.q)
    log_tail = xlog(n0, lp) + xlog(n - n0, lq) - math.log(n0) - log_beta_function(n0, n - n0)
    return st.mu * ibeta(st.p, st.q, n0, n - n0) + st.e_minus * math.exp(log_tail)


def expected_increment(st: EnvironmentStats, n: int, n0: int) -> float:
    """Expected increment at any n0 in [-1, n].

    Interior thresholds use the Beta form; n0 in {-1, 0, n} use the exact
    short-circuits mu, mu + E- q^n and 0.
    """
    _check_n0(n, n0)
    if n0 == -1:
        return st.mu
    if n0 == n:
        return 0.0
    if n0 == 0:
        return expected_increment_zero_threshold(st, n)
    return expected_increment_beta(st, n, n0)


def acceptance_probability(st: EnvironmentStats, n: int, n0: int) -> float:
    """P{proposal accepted} = P{Bin(n, p) > n0}."""
    _check_n0(n, n0)
    return binomial_upper_tail(n, st.p, n0, q=st.q)


# -- optimal thresholds ------------------------------------------------------

def _degenerate_policy(st: EnvironmentStats) -> DegenerateEnvironmentError | None:
    if st.p == 0.0:
        return DegenerateEnvironmentError("reject_all", 1.0)
    if st.q == 0.0:
        return DegenerateEnvironmentError("accept_all", 0.0)
    return None


def optimal_threshold_general(st: EnvironmentStats) -> float:
    """alpha0 = (1 + E+/E-)^-1 = E- / (E+ + E-).

    Raises :class:`DegenerateEnvironmentError` when p is 0 or 1.
    """
    err = _degenerate_policy(st)
    if err is not None:
        raise err
    return st.e_minus / (st.e_plus + st.e_minus)


def win_loss_ratio(st: EnvironmentStats) -> float:
    return st.ratio


def _sign(x: float) -> float:
    x = float(x)
    return float((x > 0) - (x < 0))


def alpha0_uniform(rho: float) -> float:
    if rho <= -SQRT3:
        return 1.0
    if rho >= SQRT3:
        return 0.0
    return 0.5 * (1.0 - rho / SQRT3)


def alpha0_normal(rho: float) -> float:
    return float(std_normal_cdf(rho)) * (1.0 - rho * float(std_normal_mills_ratio(rho)))


def alpha0_pareto(rho: float, k: float) -> float:
    rh = abs(rho / pareto_c(k))
    frac = (1.0 - (k - 2.0) * rh - (1.0 + rh) ** (1.0 - k)) / (1.0 + k * rh)
    return 0.5 * (1.0 + _sign(rho) * frac)


def alpha0_laplace(rho: float) -> float:
    s = SQRT2 * abs(rho)
    return 0.5 * (1.0 + _sign(rho) * (1.0 - s - math.exp(-s)) / (1.0 + s))


def alpha0_closed_form(family: str, rho: float, k: float | None = None) -> float:
    """Closed-form optimal threshold as a function of the adjusted mean rho."""
    if family == "uniform":
        return alpha0_uniform(rho)
    if family == "normal":
        return alpha0_normal(rho)
    if family == "pareto":
        if k is None:
            raise ValueError("symmetrized Pareto threshold needs the shape k")
        return alpha0_pareto(rho, k)
    if family == "laplace":
        return alpha0_laplace(rho)
    raise ValueError(f"unsupported family {family!r}")


def optimal_threshold_closed_form(spec: DistributionSpec) -> float:
    validate(spec)
    rho = spec.mean / spec.std
    return alpha0_closed_form(spec.family, rho, getattr(spec, "k", None))


def laplace_alpha0_derivative(rho: float) -> float:
    """d alpha0 / d rho for Laplace proposals; even in rho and never positive."""
    r = abs(rho)
    s = SQRT2 * r
    return (math.exp(-s) * (SQRT2 + r) - SQRT2) / (1.0 + s) ** 2


# -- finite-n optimum --------------------------------------------------------

@dataclass(frozen=True)
class ThresholdLadder:
    """Optimal absolute threshold at society size n.

    Every alpha in [interval_lo, interval_hi) maps to ``n0_star``; ``center``
    is the midpoint.  ``degenerate`` marks the pure accept-all/reject-all
    policies of one-signed environments.
    """

    n: int
    n0_star: int
    interval_lo: float
    interval_hi: float
    center: float
    degenerate: bool = False

    @classmethod
    def from_n0(cls, n: int, n0: int, degenerate: bool = False) -> "ThresholdLadder":
        return cls(n=n, n0_star=n0, interval_lo=n0 / n, interval_hi=(n0 + 1) / n,
                   center=(n0 + 0.5) / n, degenerate=degenerate)


def optimal_absolute_threshold(st: EnvironmentStats, n: int) -> ThresholdLadder:
    """n0 maximizing the expected increment: exclude exactly the negative terms.

    Terms with x positive votes are negative iff x/n < E-/(E+ + E-); a zero
    term is kept (ties go to the smaller, more permissive n0).
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    err = _degenerate_policy(st)
    if err is not None:
        return ThresholdLadder.from_n0(n, n if err.policy == "reject_all" else -1, degenerate=True)
    n0 = sum(1 for x in range(1, n + 1) if _coefficient(st, x, n) < 0)
    return ThresholdLadder.from_n0(n, n0)


# -- curves ------------------------------------------------------------------

def _check_sorted(grid: Sequence[float]) -> None:
    if any(b < a for a, b in zip(grid[:-1], grid[1:])):
        raise ValueError("grid must be sorted ascending")


def alpha0_curve(sweep: FamilySweep, rho_grid: Sequence[float]) -> list[tuple[float, float]]:
    """(rho, alpha0) with the family's shape held fixed along the sweep."""
    rho_grid = list(rho_grid)
    _check_sorted(rho_grid)
    return [(float(r), alpha0_closed_form(sweep.family, float(r), sweep.k)) for r in rho_grid]


def ladder_curve(sweep: FamilySweep, n: int, rho_grid: Sequence[float]) -> list[tuple[float, float]]:
    """(rho, center of the optimal half-interval) at society size n."""
    rho_grid = list(rho_grid)
    _check_sorted(rho_grid)
    return [(float(r), optimal_absolute_threshold(sweep.stats_at_rho(float(r)), n).center) for r in rho_grid]


def expectation_curve(
    sweep: FamilySweep,
    n: int,
    alpha: float | None,
    mu_grid: Sequence[float],
    optimal: bool = False,
) -> list[tuple[float, float]]:
    """(mu, expected increment) at a fixed alpha, or at the per-mu optimal n0."""
    mu_grid = list(mu_grid)
    _check_sorted(mu_grid)
    fixed_n0 = None if optimal else VotingRule(n, alpha).n0
    out = []
    for mu in mu_grid:
        st = sweep.stats_at_mu(float(mu))
        n0 = optimal_absolute_threshold(st, n).n0_star if optimal else fixed_n0
        out.append((float(mu), expected_increment(st, n, n0)))
    return out


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid lo, lo + step, ..., hi (endpoint kept despite rounding)."""
    if not step > 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if hi < lo:
        raise ValueError(f"grid needs lo <= hi, got {lo}:{hi}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)
