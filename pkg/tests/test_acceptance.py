"""Exit criteria for the package, one test per criterion.

Each test records a one-line verdict that is printed in the pytest terminal
summary (see ``conftest.pytest_terminal_summary``).
"""

import math
import time

import numpy as np
import pytest

from spectrum_queue import Regime, analytic, oracle
from spectrum_queue.cli import sweep_rewards, sweep_rows
from spectrum_queue.sim import SimConfig, events_with_warmup, replicate, simulate

VERDICTS = []


def verdict(number, title, ok, detail):
    VERDICTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
    assert ok, detail


def smaller_root_by_numpy(p, rate):
    return float(min(np.roots([p.mu, -(rate + p.mu + p.xi), rate]).real))


@pytest.fixture(scope="module")
def sweep():
    base = analytic.SystemParams()
    rewards = sweep_rewards(0.1, 70.0, 200, "linear")
    return base, sweep_rows(base, rewards)


def test_1_stationary_law_equivalence(base):
    start = time.perf_counter()
    pi = oracle.stationary_vector(base, 1.0)  # truncation from the tail rule
    d = analytic.stationary(base, 1.0)
    closed = np.array([d.p00] + [d.level_prob(n) for n in range(pi.size - 1)])
    elapsed = time.perf_counter() - start
    worst = float(np.abs(closed - pi).max())
    verdict(1, "stationary law vs generator solve", worst < 1e-7 and elapsed < 1.0,
            f"max per-state delta {worst:.2e} (tol 1e-7), {pi.size} states, {elapsed:.3f}s (limit 1s)")


def test_2_equilibrium_reproduction(base):
    q_e = analytic.individual_equilibrium(base).q_star
    q_num = oracle.numeric_equilibrium(base)
    ok = abs(q_e - 7 / 12) < 1e-9 and abs(q_e - q_num) < 1e-6
    verdict(2, "individual equilibrium", ok,
            f"closed form {q_e:.12f} vs 7/12 ({abs(q_e - 7 / 12):.1e}), bisection delta {abs(q_e - q_num):.1e}")


def test_3_social_optimum_reproduction(base):
    q_s = analytic.social_optimum(base).q_star
    q_num = oracle.numeric_social_optimum(base)
    ok = abs(q_s - q_num) < 1e-6 and round(q_s, 5) == 0.30664
    verdict(3, "social optimum", ok,
            f"closed form {q_s:.9f}, golden-section delta {abs(q_s - q_num):.1e} (tol 1e-6)")


def test_4_pricing_alignment(base):
    p_star = analytic.optimal_price(base)
    q_s = analytic.social_optimum(base).q_star
    align = abs(analytic.equilibrium_with_fee(base, p_star).q_star - q_s)
    k = analytic.kappa(base)
    low, high = base.cost / base.mu, base.cost / (base.mu * (1 - k) ** 2)
    rewards = np.linspace(low, high, 52)[1:-1]
    worst_identity = worst_align = 0.0
    for r in rewards:
        p = base.replace(reward=float(r))
        assert analytic.social_optimum(p).regime is Regime.MIXED
        fee = analytic.optimal_price(p)
        worst_identity = max(worst_identity, abs(fee - (r - math.sqrt(p.cost * r / p.mu))))
        worst_align = max(worst_align, abs(analytic.equilibrium_with_fee(p, fee).q_star
                                           - analytic.social_optimum(p).q_star))
    ok = abs(p_star - 1.585786) < 1e-6 and align < 1e-6 and worst_identity < 1e-9 and worst_align < 1e-6
    verdict(4, "admission fee", ok,
            f"p*={p_star:.9f}, alignment {align:.1e}; over 50 rewards identity {worst_identity:.1e} "
            f"(tol 1e-9), alignment {worst_align:.1e} (tol 1e-6)")


def test_5_joining_curves(sweep):
    base, rows = sweep
    ordered = all(r["q_s"] <= r["q_e"] for r in rows)
    k_ind = smaller_root_by_numpy(base, base.lam)
    expected = {
        "balk": base.cost / base.mu,
        "individual": base.cost / (base.mu * (1 - k_ind)),
        "social": base.cost / (base.mu * (1 - k_ind) ** 2),
    }
    ie, so = analytic.individual_equilibrium(base), analytic.social_optimum(base)
    found = {"balk": ie.threshold_low, "individual": ie.threshold_high, "social": so.threshold_high}
    located = all(abs(found[k] - expected[k]) < 1e-6 for k in expected)
    # frozen from a 40-digit evaluation of the smaller characteristic root
    reference = {"balk": 2 / 3, "individual": 6.4156502553198661, "social": 61.740852297878795}
    printed = all(abs(found[k] - reference[k]) < 1e-6 for k in reference)

    def regime(fn, reward):
        return fn(base.replace(reward=reward)).regime

    eps = 1e-6
    knees = (
        regime(analytic.individual_equilibrium, found["balk"] - eps) is Regime.ALWAYS_BALK
        and regime(analytic.individual_equilibrium, found["balk"] + eps) is Regime.MIXED
        and regime(analytic.social_optimum, found["balk"] - eps) is Regime.ALWAYS_BALK
        and regime(analytic.social_optimum, found["balk"] + eps) is Regime.MIXED
        and regime(analytic.individual_equilibrium, found["individual"] - eps) is Regime.MIXED
        and regime(analytic.individual_equilibrium, found["individual"] + eps) is Regime.ALWAYS_JOIN
        and regime(analytic.social_optimum, found["social"] - eps) is Regime.MIXED
        and regime(analytic.social_optimum, found["social"] + eps) is Regime.ALWAYS_JOIN
    )
    verdict(5, "q_s <= q_e and regime knees", ordered and located and printed and knees,
            f"q_s<=q_e on {len(rows)} rewards: {ordered}; knees at "
            f"{found['balk']:.6f}, {found['individual']:.6f}, {found['social']:.6f} "
            f"(vs numpy roots: {located}; vs 40-digit reference: {printed}; regime flips within 1e-6: {knees})")


def test_6_welfare_curves(sweep):
    _, rows = sweep
    tol = 1e-9
    dominance = all(r["S_qs"] >= r["S_qe"] - tol for r in rows)
    nonneg = all(r["S_qs"] >= -tol for r in rows)
    positive_only_when_joining = all(r["q_e"] == 1.0 for r in rows if r["S_qe"] > tol)
    verdict(6, "welfare ordering", dominance and nonneg and positive_only_when_joining,
            f"S(q_s)>=S(q_e): {dominance}; S(q_s)>=0: {nonneg}; S(q_e)>0 only where q_e=1: "
            f"{positive_only_when_joining} (tol 1e-9)")


def _concordance(base, q, post_events=100_000, reps=20):
    r = replicate(SimConfig(base, q, max_events=events_with_warmup(post_events), seed=42), reps)
    d = analytic.stationary(base, q)
    zs = {
        "p00": (r.mean["empirical_p00"] - d.p00) / r.stderr["empirical_p00"],
        "served": (r.mean["served_fraction"] - analytic.served_probability(base, q)) / r.stderr["served_fraction"],
        "welfare": (r.mean["welfare_rate"] - analytic.social_welfare(base, q)) / r.stderr["welfare_rate"],
    }
    levels = r.level_matrix(21)
    mean = levels.mean(axis=0)
    se = levels.std(axis=0, ddof=1) / math.sqrt(reps)
    expected = np.array([d.level_prob(n) for n in range(21)])
    with np.errstate(divide="ignore", invalid="ignore"):
        level_z = np.where(se > 0, (mean - expected) / se, np.inf)
    return zs, level_z


def test_7_simulation_concordance(base):
    start = time.perf_counter()
    details, ok = [], True
    for q in (0.3, 0.5833, 1.0):
        zs, level_z = _concordance(base, q)
        worst_level = float(np.max(np.abs(level_z)))
        ok &= all(abs(z) < 3 for z in zs.values()) and worst_level < 3
        details.append(f"q={q}: " + ", ".join(f"{k} z={v:+.2f}" for k, v in zs.items())
                       + f", max|z| levels 0-20 {worst_level:.2f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    verdict(7, "simulation vs closed forms (20 x 1e5 events)", ok,
            "; ".join(details) + f"; {elapsed:.1f}s (limit 60s)")


def test_8_equilibrium_profit_in_simulation(base):
    q_e = analytic.individual_equilibrium(base).q_star
    r = replicate(SimConfig(base, q_e, max_events=events_with_warmup(100_000), seed=42), 20)
    z = r.mean["mean_profit_per_joiner"] / r.stderr["mean_profit_per_joiner"]
    verdict(8, "zero expected profit at equilibrium", abs(z) < 3,
            f"mean profit per joiner {r.mean['mean_profit_per_joiner']:+.4f} "
            f"+/- {r.stderr['mean_profit_per_joiner']:.4f}, z={z:+.2f}")


def test_9_property_suite(random_draws):
    failures = []
    qs = np.linspace(0, 1, 21)
    for i, p in enumerate(random_draws):
        for q in (0.0, 0.4, 1.0):
            lp = p.lam * q
            d = analytic.stationary(p, q)
            lv = [d.level_prob(n) for n in range(202)]
            res = [abs(p.eta * d.p00 - p.xi * d.p_serving),
                   abs((lp + p.xi) * lv[0] - p.mu * lv[1] - p.eta * d.p00)]
            res += [abs((lp + p.xi + p.mu) * lv[n] - lp * lv[n - 1] - p.mu * lv[n + 1]) for n in range(1, 201)]
            if max(res) >= 1e-12:
                failures.append(f"balance residual {max(res):.1e} (draw {i}, q={q})")
        xs = [analytic.geometric_root(p, q) for q in qs]
        if not all(a < b for a, b in zip(xs, xs[1:])):
            failures.append(f"root not increasing (draw {i})")
        if analytic.individual_equilibrium(p) != analytic.individual_equilibrium(p.replace(eta=10 * p.eta)):
            failures.append(f"equilibrium depends on eta (draw {i})")
        config = SimConfig(p, 0.7, max_events=3_000, seed=i)
        a, b = simulate(config), simulate(config)
        if a != b:
            failures.append(f"seeded run not reproducible (draw {i})")
        if a.joined_count != a.served_count + a.dismissed_count + a.residual_count:
            failures.append(f"conservation broken (draw {i})")
    verdict(9, "module invariants on 200 random draws", not failures,
            "all hold" if not failures else "; ".join(failures[:5]))
