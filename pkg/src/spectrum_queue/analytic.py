"""Closed-form results for the partially observed SU queue with PU dismissal.

Every function is pure.  ``q`` is the joining probability of SUs that find
the station serving SUs, so the effective arrival rate is ``lam * q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .model import (
    DomainError,
    EquilibriumResult,
    NoInteriorOptimum,
    Regime,
    StationaryDistribution,
    SystemParams,
)


@dataclass(frozen=True)
class WelfareCurvePoint:
    q: float
    welfare: float
    profit_join: float


def _check_q(q: float, name: str = "q") -> float:
    if not (0.0 <= q <= 1.0):
        raise DomainError(name, f"must lie in [0, 1], got {q!r}")
    return q


def _check_level(n: int) -> int:
    if n < 0:
        raise DomainError("n", f"must be >= 0, got {n!r}")
    return n


def root_for_rate(params: SystemParams, rate: float) -> float:
    """Smaller root of ``mu*y**2 - (rate+mu+xi)*y + rate = 0``.

    Uses the product-of-roots form ``2*rate / (b + sqrt(disc))``, which is
    algebraically the same root without the cancellation in ``b - sqrt``.
    """
    b = rate + params.mu + params.xi
    disc = b * b - 4.0 * rate * params.mu
    return 2.0 * rate / (b + math.sqrt(disc))


def geometric_root(params: SystemParams, q: float) -> float:
    """Geometric ratio ``x(lam*q)`` of the SU levels, in ``[0, 1)``."""
    _check_q(q)
    return root_for_rate(params, params.lam * q)


def kappa(params: SystemParams) -> float:
    """Geometric ratio at full arrival rate (everyone joins)."""
    return root_for_rate(params, params.lam)


def stationary(params: SystemParams, q: float) -> StationaryDistribution:
    x = geometric_root(params, q)
    return StationaryDistribution(p00=params.xi / (params.eta + params.xi), root_x=x)


def service_probability(params: SystemParams, n: int) -> float:
    """Chance that an SU joining behind ``n`` others finishes before a PU arrives."""
    _check_level(n)
    return (params.mu / (params.mu + params.xi)) ** (n + 1)


def expected_sojourn(params: SystemParams, n: int) -> float:
    """Mean of min(Gamma(n+1, mu), Exp(xi)): time spent before leaving either way."""
    return (1.0 - service_probability(params, n)) / params.xi


def observed_profit(params: SystemParams, n: int, fee: float = 0.0) -> float:
    """Expected profit of joining behind ``n`` SUs, fee charged on completion."""
    theta = service_probability(params, n)
    c_xi = params.cost / params.xi
    return (params.reward - fee) * theta - c_xi * (1.0 - theta)


def _served_given_serving(params: SystemParams, x: float) -> float:
    # sum_n p1(n,1) * theta(n) for p1 geometric with ratio x
    mu = params.mu
    return mu * (1.0 - x) / (mu + params.xi - mu * x)


def served_probability(params: SystemParams, q: float) -> float:
    """Probability a joiner is eventually served, averaged over the level it sees."""
    return _served_given_serving(params, geometric_root(params, q))


def _profit_join_at_root(params: SystemParams, x: float, reward: float) -> float:
    c_xi = params.cost / params.xi
    return (reward + c_xi) * _served_given_serving(params, x) - c_xi


def profit_join(params: SystemParams, q: float, fee: float = 0.0) -> float:
    """Expected profit of a tagged SU that joins while the others join w.p. ``q``."""
    x = geometric_root(params, q)
    return _profit_join_at_root(params, x, params.reward - fee)


def profit_mixed(params: SystemParams, q_tilde: float, q: float) -> float:
    _check_q(q_tilde, "q_tilde")
    return q_tilde * profit_join(params, q)


def throughput(params: SystemParams, q: float) -> float:
    """Rate of completed SU services."""
    dist = stationary(params, q)
    return params.mu * dist.p_serving * dist.root_x


def mean_queue_length(params: SystemParams, q: float) -> float:
    return stationary(params, q).mean_queue_length()


def _welfare_at_root(params: SystemParams, x: float, reward: float) -> float:
    num = params.eta * x * (params.mu * reward * (1.0 - x) - params.cost)
    # + 0.0 folds the -0.0 produced at x == 0
    return num / ((params.xi + params.eta) * (1.0 - x)) + 0.0


def social_welfare(params: SystemParams, q: float) -> float:
    """Welfare rate: served throughput times reward minus cost times mean queue."""
    return _welfare_at_root(params, geometric_root(params, q), params.reward)


def welfare_curve(params: SystemParams, qs: Iterable[float]) -> list[WelfareCurvePoint]:
    return [
        WelfareCurvePoint(q=q, welfare=social_welfare(params, q), profit_join=profit_join(params, q))
        for q in qs
    ]


def _require_arrivals(params: SystemParams) -> None:
    if params.lam <= 0.0:
        raise DomainError("lambda", "must be > 0 for the joining game to be defined")


def _classify(q: float) -> tuple[float, Regime]:
    # rounding at the regime edges can push the closed form just outside (0, 1)
    if q >= 1.0:
        return 1.0, Regime.ALWAYS_JOIN
    if q <= 0.0:
        return 0.0, Regime.ALWAYS_BALK
    return q, Regime.MIXED


def _equilibrium_for_reward(params: SystemParams, reward: float) -> EquilibriumResult:
    k = kappa(params)
    mu, cost = params.mu, params.cost
    low = cost / mu
    high = cost / (mu * (1.0 - k))
    if reward >= high:
        q, regime = 1.0, Regime.ALWAYS_JOIN
    elif reward > low:
        theta = (mu * reward - cost) * (cost + params.xi * reward) / (params.lam * cost * reward)
        q, regime = _classify(theta)
    else:
        q, regime = 0.0, Regime.ALWAYS_BALK
    return EquilibriumResult(q, regime, low, high, k)


def individual_equilibrium(params: SystemParams) -> EquilibriumResult:
    """Symmetric equilibrium joining probability.

    Joining pays while the profit of a joiner is positive, and that profit
    falls as more SUs join.  The interior solution is where the geometric
    ratio equals ``1 - cost/(mu*reward)``.  The result does not involve
    ``eta``: SUs only decide while the station is serving SUs.
    """
    _require_arrivals(params)
    return _equilibrium_for_reward(params, params.reward)


def social_optimum(params: SystemParams) -> EquilibriumResult:
    """Joining probability maximizing the welfare rate.

    Welfare depends on ``q`` only through the geometric ratio ``x``, and as a
    function of ``x`` it peaks at ``1 - sqrt(cost/(mu*reward))``.  Since
    ``x`` increases with ``q``, the optimum is the ``q`` that produces that
    ratio, clipped to ``[0, 1]``.
    """
    _require_arrivals(params)
    k = kappa(params)
    mu, cost, reward = params.mu, params.cost, params.reward
    low = cost / mu
    high = cost / (mu * (1.0 - k) ** 2)
    if reward >= high:
        q, regime = 1.0, Regime.ALWAYS_JOIN
    elif reward > low:
        vt = mu * reward * cost
        s = math.sqrt(vt)
        phi = s * (mu * reward - s) * (params.xi * reward + s) / (params.lam * vt * reward)
        q, regime = _classify(phi)
    else:
        q, regime = 0.0, Regime.ALWAYS_BALK
    return EquilibriumResult(q, regime, low, high, k)


def equilibrium_with_fee(params: SystemParams, fee: float) -> EquilibriumResult:
    """Equilibrium when completed services pay ``fee`` out of the reward."""
    if not (fee >= 0.0) or not math.isfinite(fee):
        raise DomainError("fee", f"must be a finite value >= 0, got {fee!r}")
    _require_arrivals(params)
    return _equilibrium_for_reward(params, params.reward - fee)


def optimal_price(params: SystemParams) -> float:
    """Admission fee that moves the equilibrium onto the social optimum.

    The fee leaves joiners with zero expected profit at ``q_s``.  Profit of
    joining is affine in the fee, so the root is solved exactly.
    """
    social = social_optimum(params)
    if social.regime is not Regime.MIXED:
        side = "below C/mu" if social.regime is Regime.ALWAYS_BALK else "above the full-join threshold"
        raise NoInteriorOptimum(
            f"social optimum is {social.regime.value} (reward {params.reward:g} {side}); no fee binds"
        )
    x = geometric_root(params, social.q_star)
    c_xi = params.cost / params.xi
    # 0 = (reward - fee + c_xi) * a - c_xi
    a = _served_given_serving(params, x)
    return params.reward + c_xi - c_xi / a
