"""Domain types shared by the analytic, oracle, simulation and CLI layers.

The system is a single base station that serves secondary users (SUs) FCFS
while no primary user (PU) is present.  A PU arrival dismisses every SU in
the system; the station then serves the PU and returns to SU service with
an empty queue.  States are ``(n, 1)`` (serving SUs, ``n`` in system) and
``(0, 0)`` (serving a PU).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping


class DomainError(ValueError):
    """Raised when a parameter falls outside its admissible range."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class NoInteriorOptimum(ValueError):
    """The social optimum sits on a boundary, so no admission fee binds."""


class SolveError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


class Regime(str, enum.Enum):
    ALWAYS_JOIN = "always_join"
    MIXED = "mixed"
    ALWAYS_BALK = "always_balk"


# (name, lower bound, strict?) in validation order
_BOUNDS = (
    ("lam", 0.0, False),
    ("xi", 0.0, True),
    ("mu", 0.0, True),
    ("eta", 0.0, True),
    ("cost", 0.0, True),
    ("reward", 0.0, False),
)

# attribute name -> wire name
_WIRE_NAMES = {
    "lam": "lambda",
    "xi": "xi",
    "mu": "mu",
    "eta": "eta",
    "cost": "cost",
    "reward": "reward",
}


@dataclass(frozen=True)
class SystemParams:
    """Rates and economic constants of the model.

    ``lam`` is the SU arrival rate (serialized as ``lambda``), ``xi`` the PU
    arrival rate, ``mu`` the SU service rate, ``eta`` the PU service
    completion rate, ``cost`` the waiting cost per unit time and ``reward``
    the value of a completed service.
    """

    lam: float = 7.0
    xi: float = 0.5
    mu: float = 3.0
    eta: float = 2.0
    cost: float = 2.0
    reward: float = 3.0

    def __post_init__(self):
        validate(self)

    def replace(self, **changes: float) -> "SystemParams":
        values = asdict(self)
        values.update(changes)
        return SystemParams(**values)

    def to_dict(self) -> dict[str, float]:
        return {_WIRE_NAMES[k]: v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemParams":
        kwargs = {}
        for attr, wire in _WIRE_NAMES.items():
            if wire in data:
                kwargs[attr] = float(data[wire])
        unknown = set(data) - set(_WIRE_NAMES.values())
        if unknown:
            raise DomainError(sorted(unknown)[0], "unknown field")
        return cls(**kwargs)

    def to_json(self) -> str:
        # repr-based float formatting round-trips every finite double
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SystemParams":
        return cls.from_dict(json.loads(text))


def validate(params: SystemParams) -> SystemParams:
    """Return ``params`` unchanged, or raise DomainError on the first bad field."""
    for name, low, strict in _BOUNDS:
        value = getattr(params, name)
        wire = _WIRE_NAMES[name]
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise DomainError(wire, f"must be a finite real, got {value!r}")
        if strict and value <= low:
            raise DomainError(wire, f"must be > {low:g}, got {value!r}")
        if not strict and value < low:
            raise DomainError(wire, f"must be >= {low:g}, got {value!r}")
    return params


@dataclass(frozen=True)
class JoiningStrategy:
    """Probability ``q`` that an SU finding the station serving SUs joins."""

    q: float

    def __post_init__(self):
        if not (0.0 <= self.q <= 1.0):
            raise DomainError("q", f"must lie in [0, 1], got {self.q!r}")

    def effective_rate(self, params: SystemParams) -> float:
        return params.lam * self.q


@dataclass(frozen=True)
class StationaryDistribution:
    """Stationary law: ``p00`` for the PU state, geometric levels otherwise."""

    p00: float
    root_x: float

    @property
    def p_serving(self) -> float:
        """Total mass of the SU-serving states, ``eta / (eta + xi)``."""
        return 1.0 - self.p00

    def level_prob(self, n: int) -> float:
        if n < 0:
            return 0.0
        return self.p_serving * (1.0 - self.root_x) * self.root_x**n

    def tail_mass(self, n: int) -> float:
        """Mass of levels strictly above ``n``."""
        return self.p_serving * self.root_x ** (n + 1)

    def mean_queue_length(self) -> float:
        x = self.root_x
        return self.p_serving * x / (1.0 - x)


@dataclass(frozen=True)
class EquilibriumResult:
    q_star: float
    regime: Regime
    threshold_low: float
    threshold_high: float
    kappa: float

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["regime"] = self.regime.value
        return d


@dataclass
class SimStats:
    """Empirical counterparts of the analytic quantities from one run.

    Per-SU statistics cover SUs that arrive after the warmup cut.  Sojourn
    and profit averages are taken over joiners whose outcome (served or
    dismissed) is known by the end of the run.
    """

    empirical_p00: float
    level_histogram: dict[int, float]
    served_fraction: float
    mean_sojourn_served: float
    mean_profit_per_joiner: float
    welfare_rate: float
    joined_count: int
    served_count: int
    dismissed_count: int
    balked_count: int
    residual_count: int
    horizon: float
    events: int
    mean_queue_length: float = 0.0
    throughput: float = 0.0
    measured_time: float = 0.0
    # entry level n -> (count, mean sojourn, sample variance of sojourn)
    sojourn_by_level: dict[int, tuple[int, float, float]] = field(default_factory=dict)
    # batch-means standard errors (event-count runs only)
    batch_stderr: dict[str, float] = field(default_factory=dict)
    level_batch_stderr: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["level_histogram"] = {str(k): v for k, v in self.level_histogram.items()}
        d["sojourn_by_level"] = {
            str(k): {"count": c, "mean": m, "var": v}
            for k, (c, m, v) in self.sojourn_by_level.items()
        }
        return d
