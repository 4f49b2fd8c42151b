"""Queueing-game analysis of secondary-user spectrum access with primary-user dismissal."""

from .analytic import (
    equilibrium_with_fee,
    expected_sojourn,
    geometric_root,
    individual_equilibrium,
    observed_profit,
    optimal_price,
    profit_join,
    profit_mixed,
    service_probability,
    social_optimum,
    social_welfare,
    stationary,
)
from .model import (
    ConfigError,
    DomainError,
    EquilibriumResult,
    JoiningStrategy,
    NoInteriorOptimum,
    Regime,
    SimStats,
    SolveError,
    StationaryDistribution,
    SystemParams,
    validate,
)

__version__ = "0.1.0"
