"""Discrete-event simulation of the SU queue with PU dismissal.

The chain has at most three competing exponential clocks in any state, so
each event draws one holding time from the total rate and one uniform to
pick the transition.  A third uniform decides whether an arriving SU joins.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from ..model import ConfigError, JoiningStrategy, SimStats, SystemParams
from ._backend import get_kernel
from ._kernel_py import SOJOURN_LEVELS

CHUNK = 1 << 16
BATCHES = 20
_MASK64 = (1 << 64) - 1

EVENT_KINDS = ("SuArrival", "SuService", "PuArrival", "PuDeparture")


@dataclass(frozen=True)
class SimConfig:
    params: SystemParams
    strategy: JoiningStrategy
    horizon: Optional[float] = None
    max_events: Optional[int] = None
    seed: int = 0
    warmup_fraction: float = 0.1

    def __post_init__(self):
        if isinstance(self.strategy, (int, float)):
            object.__setattr__(self, "strategy", JoiningStrategy(float(self.strategy)))
        if (self.horizon is None) == (self.max_events is None):
            raise ConfigError("exactly one of horizon / max_events must be set")
        if self.horizon is not None and not (self.horizon > 0.0 and math.isfinite(self.horizon)):
            raise ConfigError(f"horizon must be a positive finite time, got {self.horizon!r}")
        if self.max_events is not None and (int(self.max_events) != self.max_events or self.max_events <= 0):
            raise ConfigError(f"max_events must be a positive integer, got {self.max_events!r}")
        if not (0 <= int(self.seed) <= _MASK64) or int(self.seed) != self.seed:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not (0.0 <= self.warmup_fraction < 1.0):
            raise ConfigError(f"warmup_fraction must lie in [0, 1), got {self.warmup_fraction!r}")

    @property
    def q(self) -> float:
        return self.strategy.q

    def with_seed(self, seed: int) -> "SimConfig":
        return SimConfig(self.params, self.strategy, self.horizon, self.max_events, seed,
                         self.warmup_fraction)


def events_with_warmup(post_warmup_events: int, warmup_fraction: float = 0.1) -> int:
    """Total event budget whose post-warmup part has ``post_warmup_events`` events."""
    return math.ceil(post_warmup_events / (1.0 - warmup_fraction))


@dataclass(frozen=True)
class EventRecord:
    time: float
    kind: str
    queue_length_after: int
    server_state_after: int

    def to_line(self) -> str:
        return f"{self.time!r},{self.kind},{self.queue_length_after},{self.server_state_after}"


class _TraceBuffer:
    def __init__(self, size: int):
        self.time = np.zeros(size, dtype=np.float64)
        self.kind = np.zeros(size, dtype=np.int8)
        self.queue = np.zeros(size, dtype=np.int64)
        self.server = np.zeros(size, dtype=np.int8)
        self.length = 0

    def records(self) -> Iterator[EventRecord]:
        for i in range(self.length):
            yield EventRecord(float(self.time[i]), EVENT_KINDS[self.kind[i]],
                              int(self.queue[i]), int(self.server[i]))


def splitmix64(value: int) -> int:
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    return splitmix64((seed + index) & _MASK64)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _kernel_for(config: SimConfig, backend: Optional[str]):
    p = config.params
    kernel_cls = get_kernel(backend)
    if config.horizon is not None:
        return kernel_cls(p.lam, p.xi, p.mu, p.eta, config.q,
                          stop_time=float(config.horizon), stop_events=-1,
                          warm_time=config.warmup_fraction * config.horizon, warm_events=0)
    total = int(config.max_events)
    return kernel_cls(p.lam, p.xi, p.mu, p.eta, config.q,
                      stop_time=math.inf, stop_events=total,
                      warm_time=0.0, warm_events=int(config.warmup_fraction * total))


def simulate(config: SimConfig, on_event: Optional[Callable[[EventRecord], None]] = None,
             backend: Optional[str] = None) -> SimStats:
    """Run one replication and summarize it.

    ``on_event`` receives every event in order; leave it unset for speed.
    ``backend`` overrides the kernel chosen at import (``"python"`` or
    ``"cython"``).  In event-count mode the post-warmup events are also cut
    into ``BATCHES`` equal batches whose spread gives batch-means standard
    errors.
    """
    kernel = _kernel_for(config, backend)
    rng = _rng(config.seed)
    boundaries = _batch_boundaries(config)
    snapshots = []
    while not kernel.done:
        size = CHUNK
        if boundaries:
            size = min(CHUNK, boundaries[0] - kernel.events)
        exp_draws = rng.standard_exponential(size)
        u_event = rng.random(size)
        u_join = rng.random(size)
        trace = _TraceBuffer(size) if on_event is not None else None
        kernel.advance(exp_draws, u_event, u_join, trace)
        if trace is not None:
            for rec in trace.records():
                on_event(rec)
        if boundaries and kernel.events == boundaries[0]:
            boundaries.pop(0)
            snapshots.append(_Snapshot.take(kernel))
    stats = _summarize(kernel, config)
    if len(snapshots) == BATCHES + 1:
        _attach_batch_errors(stats, snapshots, config.params)
    return stats


def _batch_boundaries(config: SimConfig) -> list[int]:
    if config.max_events is None:
        return []
    total = int(config.max_events)
    warm = int(config.warmup_fraction * total)
    post = total - warm
    if post < BATCHES * 10:
        return [total]
    return [warm + (post * k) // BATCHES for k in range(BATCHES + 1) if warm + (post * k) // BATCHES > 0]


@dataclass(frozen=True)
class _Snapshot:
    t: float
    p00_time: float
    level_time: np.ndarray
    completions: int
    served: int
    dismissed: int
    sojourn_resolved: float

    @classmethod
    def take(cls, kernel) -> "_Snapshot":
        return cls(kernel.t, kernel.p00_time, kernel.level_times(), kernel.completions,
                   kernel.served, kernel.dismissed, kernel.sojourn_resolved)


def _attach_batch_errors(stats: SimStats, snaps: list, params: SystemParams) -> None:
    rows = {name: [] for name in ("empirical_p00", "served_fraction", "mean_profit_per_joiner",
                                  "welfare_rate", "mean_queue_length", "throughput")}
    levels = []
    for a, b in zip(snaps[:-1], snaps[1:]):
        span = b.t - a.t
        lt = b.level_time.copy()
        lt[:a.level_time.size] -= a.level_time
        served = b.served - a.served
        resolved = served + b.dismissed - a.dismissed
        queue = float(np.dot(np.arange(lt.size), lt)) / span
        thr = (b.completions - a.completions) / span
        rows["empirical_p00"].append((b.p00_time - a.p00_time) / span)
        rows["served_fraction"].append(served / resolved if resolved else 0.0)
        rows["mean_profit_per_joiner"].append(
            (params.reward * served - params.cost * (b.sojourn_resolved - a.sojourn_resolved)) / resolved
            if resolved else 0.0)
        rows["welfare_rate"].append(thr * params.reward - params.cost * queue)
        rows["mean_queue_length"].append(queue)
        rows["throughput"].append(thr)
        levels.append(lt / span)
    stats.batch_stderr = {k: float(_mean_se(np.array(v))[1]) for k, v in rows.items()}
    width = max(x.size for x in levels)
    mat = np.zeros((len(levels), width))
    for i, x in enumerate(levels):
        mat[i, :x.size] = x
    stats.level_batch_stderr = [float(v) for v in _mean_se(mat)[1]]


def _summarize(kernel, config: SimConfig) -> SimStats:
    p = config.params
    window = kernel.t - kernel.t0
    level_time = kernel.level_times()
    visited = np.flatnonzero(level_time > 0.0)
    top = int(visited[-1]) + 1 if visited.size else 1
    level_time = level_time[:top]
    if window > 0.0:
        p00 = kernel.p00_time / window
        hist = level_time / window
        mean_queue = float(np.dot(np.arange(top), level_time)) / window
        throughput = kernel.completions / window
    else:
        p00, hist, mean_queue, throughput = 0.0, np.zeros(top), 0.0, 0.0

    resolved = kernel.served + kernel.dismissed
    counts, sums, sumsq = kernel.resolved_by_level()
    by_level = {}
    for n in range(SOJOURN_LEVELS):
        c = int(counts[n])
        if c == 0:
            continue
        mean = sums[n] / c
        var = (sumsq[n] - c * mean * mean) / (c - 1) if c > 1 else 0.0
        by_level[n] = (c, float(mean), float(max(var, 0.0)))

    return SimStats(
        empirical_p00=float(p00),
        level_histogram={n: float(v) for n, v in enumerate(hist)},
        served_fraction=kernel.served / resolved if resolved else 0.0,
        mean_sojourn_served=kernel.sojourn_served / kernel.served if kernel.served else 0.0,
        mean_profit_per_joiner=(
            (p.reward * kernel.served - p.cost * kernel.sojourn_resolved) / resolved if resolved else 0.0
        ),
        welfare_rate=throughput * p.reward - p.cost * mean_queue,
        joined_count=int(kernel.joined),
        served_count=int(kernel.served),
        dismissed_count=int(kernel.dismissed),
        balked_count=int(kernel.balked),
        residual_count=int(kernel.residual()),
        horizon=float(kernel.t),
        events=int(kernel.events),
        mean_queue_length=mean_queue,
        throughput=throughput,
        measured_time=float(window),
        sojourn_by_level=by_level,
    )


_SCALAR_FIELDS = (
    "empirical_p00",
    "served_fraction",
    "mean_sojourn_served",
    "mean_profit_per_joiner",
    "welfare_rate",
    "mean_queue_length",
    "throughput",
    "joined_count",
    "served_count",
    "dismissed_count",
    "balked_count",
)


@dataclass
class ReplicationSummary:
    """Per-field mean and standard error over independent replications."""

    seeds: list[int]
    runs: list[SimStats]
    mean: dict[str, float] = field(default_factory=dict)
    stderr: dict[str, float] = field(default_factory=dict)
    level_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    level_stderr: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def level_matrix(self, levels: int) -> np.ndarray:
        out = np.zeros((len(self.runs), levels))
        for i, run in enumerate(self.runs):
            for n, v in run.level_histogram.items():
                if n < levels:
                    out[i, n] = v
        return out

    def to_dict(self) -> dict:
        return {
            "replications": len(self.runs),
            "seeds": self.seeds,
            "mean": self.mean,
            "stderr": self.stderr,
            "level_mean": self.level_mean.tolist(),
            "level_stderr": self.level_stderr.tolist(),
        }


def _mean_se(values: np.ndarray) -> tuple:
    n = values.shape[0]
    return values.mean(axis=0), values.std(axis=0, ddof=1) / math.sqrt(n)


def replicate(config: SimConfig, n_replications: int, workers: int = 1,
              backend: Optional[str] = None) -> ReplicationSummary:
    if int(n_replications) != n_replications or n_replications < 2:
        raise ConfigError(f"n_replications must be an integer >= 2, got {n_replications!r}")
    seeds = [derive_seed(config.seed, i) for i in range(n_replications)]
    configs = [config.with_seed(s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_simulate_plain, configs, [backend] * len(configs)))
    else:
        runs = [simulate(c, backend=backend) for c in configs]

    summary = ReplicationSummary(seeds=seeds, runs=runs)
    for name in _SCALAR_FIELDS:
        m, se = _mean_se(np.array([float(getattr(r, name)) for r in runs]))
        summary.mean[name] = float(m)
        summary.stderr[name] = float(se)
    levels = max(len(r.level_histogram) for r in runs)
    summary.level_mean, summary.level_stderr = _mean_se(summary.level_matrix(levels))
    return summary


def _simulate_plain(config: SimConfig, backend: Optional[str]) -> SimStats:
    return simulate(config, backend=backend)

