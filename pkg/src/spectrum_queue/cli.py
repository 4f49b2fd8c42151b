"""Command-line front end.

Exit codes: 0 success, 1 validation breach, 2 bad input.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import analytic, oracle
from .model import ConfigError, DomainError, NoInteriorOptimum, SolveError, SystemParams
from .sim import SimConfig, events_with_warmup, replicate, simulate

SWEEP_HEADER = ("reward", "q_e", "q_s", "S_qe", "S_qs", "p_star")
DEFAULT_SEED = 42
SEED_ENV = "SPECTRUM_QUEUE_SEED"


class UsageError(Exception):
    pass


def fmt(value: Optional[float]) -> str:
    """Six significant digits, locale independent; empty for undefined."""
    if value is None:
        return ""
    return format(value, ".6g")


# ---------------------------------------------------------------- reports


def analytic_report(params: SystemParams) -> dict:
    ie = analytic.individual_equilibrium(params)
    so = analytic.social_optimum(params)
    try:
        p_star = analytic.optimal_price(params)
    except NoInteriorOptimum:
        p_star = None
    return {
        "params": params.to_dict(),
        "kappa": ie.kappa,
        "thresholds": {
            "balk_below": ie.threshold_low,
            "individual_join_at": ie.threshold_high,
            "social_join_at": so.threshold_high,
        },
        "q_e": ie.q_star,
        "q_s": so.q_star,
        "regime_e": ie.regime.value,
        "regime_s": so.regime.value,
        "S_qe": analytic.social_welfare(params, ie.q_star),
        "S_qs": analytic.social_welfare(params, so.q_star),
        "p_star": p_star,
    }


def sweep_rewards(reward_min: float, reward_max: float, steps: int, scale: str) -> np.ndarray:
    if steps < 2:
        raise UsageError(f"--steps must be >= 2, got {steps}")
    if not (0.0 < reward_min < reward_max):
        raise UsageError(f"need 0 < reward-min < reward-max, got {reward_min} and {reward_max}")
    if scale == "linear":
        return np.linspace(reward_min, reward_max, steps)
    if scale == "log":
        return np.geomspace(reward_min, reward_max, steps)
    raise UsageError(f"unknown scale {scale!r}")


def sweep_rows(base: SystemParams, rewards: Sequence[float]) -> list[dict]:
    rows = []
    for reward in rewards:
        params = base.replace(reward=float(reward))
        rep = analytic_report(params)
        rows.append({
            "reward": float(reward),
            "q_e": rep["q_e"],
            "q_s": rep["q_s"],
            "S_qe": rep["S_qe"],
            "S_qs": rep["S_qs"],
            "p_star": rep["p_star"],
        })
    return rows


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow([fmt(row[k]) for k in SWEEP_HEADER])
    return buf.getvalue()


def _z(observed: float, expected: float, se: Optional[float]) -> Optional[float]:
    if se is None or not se > 0.0:
        return None
    return (observed - expected) / se


def simulation_report(params: SystemParams, q: float, *, events: Optional[int], horizon: Optional[float],
                      seed: int, replications: int, trace=None) -> dict:
    config = SimConfig(params, q, horizon=horizon, max_events=events, seed=seed)
    expected = {
        "empirical_p00": analytic.stationary(params, q).p00,
        "served_fraction": analytic.served_probability(params, q),
        "welfare_rate": analytic.social_welfare(params, q),
        "mean_queue_length": analytic.mean_queue_length(params, q),
        "throughput": analytic.throughput(params, q),
        "mean_profit_per_joiner": analytic.profit_join(params, q),
    }
    if replications >= 2:
        summary = replicate(config, replications)
        observed, stderr = summary.mean, summary.stderr
        body = summary.to_dict()
        method = "replications"
    else:
        on_event = (lambda rec: trace.write(rec.to_line() + "\n")) if trace is not None else None
        stats = simulate(config, on_event=on_event)
        observed = {k: getattr(stats, k) for k in expected}
        stderr = stats.batch_stderr
        body = stats.to_dict()
        method = "batch_means" if stderr else "none"
    comparison = {
        k: {
            "simulated": observed[k],
            "analytic": v,
            "stderr": stderr.get(k),
            "z": _z(observed[k], v, stderr.get(k)),
        }
        for k, v in expected.items()
    }
    return {
        "params": params.to_dict(),
        "q": q,
        "seed": seed,
        "stderr_method": method,
        "stats": body,
        "comparison": comparison,
    }


def random_params(rng: np.random.Generator) -> SystemParams:
    rates = rng.uniform(0.1, 10.0, size=4)
    econ = rng.uniform(0.1, 20.0, size=2)
    return SystemParams(lam=rates[0], xi=rates[1], mu=rates[2], eta=rates[3], cost=econ[0], reward=econ[1])


def validation_deltas(params: SystemParams) -> dict[str, float]:
    """Largest analytic-vs-oracle discrepancy per checked quantity."""
    ie = analytic.individual_equilibrium(params)
    so = analytic.social_optimum(params)
    worst = 0.0
    for q in sorted({0.0, 0.5, 1.0, ie.q_star, so.q_star}):
        pi = oracle.stationary_vector(params, q)
        dist = analytic.stationary(params, q)
        closed = np.array([dist.p00] + [dist.level_prob(n) for n in range(pi.size - 1)])
        worst = max(worst, float(np.abs(closed - pi).max()))
    deltas = {
        "stationary": worst,
        "q_e": abs(ie.q_star - oracle.numeric_equilibrium(params)),
        "q_s": abs(so.q_star - oracle.numeric_social_optimum(params)),
    }
    p_num = oracle.numeric_price(params)
    try:
        p_ana = analytic.optimal_price(params)
    except NoInteriorOptimum:
        p_ana = None
    if (p_num is None) != (p_ana is None):
        deltas["p_star"] = math.inf
    elif p_num is not None:
        deltas["p_star"] = abs(p_ana - p_num)
    return deltas


# ---------------------------------------------------------------- commands


def _params(args) -> SystemParams:
    return SystemParams(lam=args.lam, xi=args.xi, mu=args.mu, eta=args.eta, cost=args.cost, reward=args.reward)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def cmd_analytic(args) -> int:
    rep = analytic_report(_params(args))
    if args.json:
        _emit(args, _dump(rep))
        return 0
    lines = [
        f"kappa            {fmt(rep['kappa'])}",
        f"balk below       {fmt(rep['thresholds']['balk_below'])}",
        f"IE join from     {fmt(rep['thresholds']['individual_join_at'])}",
        f"SO join from     {fmt(rep['thresholds']['social_join_at'])}",
        f"q_e              {fmt(rep['q_e'])} ({rep['regime_e']})",
        f"q_s              {fmt(rep['q_s'])} ({rep['regime_s']})",
        f"S(q_e)           {fmt(rep['S_qe'])}",
        f"S(q_s)           {fmt(rep['S_qs'])}",
        f"admission fee    {fmt(rep['p_star']) or 'undefined'}",
    ]
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_sweep(args) -> int:
    rewards = sweep_rewards(args.reward_min, args.reward_max, args.steps, args.scale)
    rows = sweep_rows(_params(args), rewards)
    if args.json:
        _emit(args, _dump(rows))
    else:
        _emit(args, sweep_csv(rows))
    return 0


def cmd_simulate(args) -> int:
    params = _params(args)
    q = args.q if args.q is not None else analytic.individual_equilibrium(params).q_star
    if args.horizon is not None and args.events is not None:
        raise UsageError("give only one of --events / --horizon")
    events = args.events
    if args.horizon is None and events is None:
        events = events_with_warmup(10**6)
    if args.replications < 1:
        raise UsageError("--replications must be >= 1")
    with contextlib.ExitStack() as stack:
        trace = None
        if args.trace is not None:
            if args.replications >= 2:
                raise UsageError("--trace needs a single replication")
            trace = sys.stderr if args.trace == "-" else stack.enter_context(open(args.trace, "w"))
        rep = simulation_report(params, q, events=events, horizon=args.horizon, seed=_seed(args),
                                replications=args.replications, trace=trace)
    if args.json:
        _emit(args, _dump(rep))
        return 0
    lines = [f"q={fmt(q)} seed={rep['seed']} stderr from {rep['stderr_method']}",
             f"{'quantity':<24}{'simulated':>14}{'analytic':>14}{'stderr':>14}{'z':>11}"]
    for name, c in rep["comparison"].items():
        lines.append(f"{name:<24}{fmt(c['simulated']):>14}{fmt(c['analytic']):>14}"
                     f"{fmt(c['stderr']) or '-':>14}{fmt(c['z']) or '-':>11}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_validate(args) -> int:
    if not args.tolerance > 0.0:
        raise UsageError("--tolerance must be > 0")
    cases = []
    if args.draws:
        rng = np.random.default_rng(_seed(args))
        cases = [random_params(rng) for _ in range(args.draws)]
    else:
        cases = [_params(args)]
    rows = []
    ok = True
    for i, params in enumerate(cases):
        deltas = validation_deltas(params)
        passed = all(d <= args.tolerance for d in deltas.values())
        ok &= passed
        rows.append({"case": i, "params": params.to_dict(), "deltas": deltas, "pass": passed})
    if args.json:
        safe = [dict(r, deltas={k: (v if math.isfinite(v) else None) for k, v in r["deltas"].items()})
                for r in rows]
        _emit(args, _dump({"tolerance": args.tolerance, "pass": ok, "cases": safe}))
    else:
        lines = [f"{'case':>5} {'stationary':>12} {'q_e':>12} {'q_s':>12} {'p_star':>12}  result"]
        for r in rows:
            d = r["deltas"]
            cells = [f"{d[k]:12.3e}" if k in d else f"{'n/a':>12}" for k in ("stationary", "q_e", "q_s", "p_star")]
            lines.append(f"{r['case']:>5} {' '.join(cells)}  {'pass' if r['pass'] else 'FAIL'}")
        lines.append(f"{'PASS' if ok else 'FAIL'} at tolerance {args.tolerance:g} over {len(rows)} case(s)")
        _emit(args, "\n".join(lines) + "\n")
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model parameters")
    g.add_argument("--lambda", dest="lam", type=float, default=7.0, help="SU arrival rate")
    g.add_argument("--xi", type=float, default=0.5, help="PU arrival rate")
    g.add_argument("--mu", type=float, default=3.0, help="SU service rate")
    g.add_argument("--eta", type=float, default=2.0, help="PU service completion rate")
    g.add_argument("--cost", type=float, default=2.0, help="waiting cost per unit time")
    g.add_argument("--reward", type=float, default=3.0, help="reward for a completed service")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (fallback ${SEED_ENV}, then {DEFAULT_SEED})")

    parser = argparse.ArgumentParser(prog="spectrum-queue", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", parents=[common], help="equilibrium, optimum and fee at one point")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("sweep", parents=[common], help="reward sweep as CSV")
    p.add_argument("--reward-min", type=float, default=0.1)
    p.add_argument("--reward-max", type=float, default=70.0)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[common], help="simulate and compare with the closed forms")
    p.add_argument("--q", type=float, default=None, help="joining probability (default: equilibrium)")
    p.add_argument("--events", type=int, default=None, help="total events including warmup")
    p.add_argument("--horizon", type=float, default=None, help="simulated time instead of --events")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--trace", nargs="?", const="-", default=None, metavar="PATH",
                   help="write 'time,kind,N,I' per event to PATH (stderr if omitted)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", parents=[common], help="closed forms vs numeric oracle")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--draws", type=int, default=0, help="check this many random parameter sets instead")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        return args.func(args)
    except (DomainError, ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
