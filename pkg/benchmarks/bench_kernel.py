"""Time the compiled and pure-Python event kernels on the same run.

    python benchmarks/bench_kernel.py --events 1000000 --repeat 3
"""

import argparse
import time

from spectrum_queue import SystemParams, individual_equilibrium
from spectrum_queue.sim import SimConfig, available_backends, simulate


def best_time(config, backend, repeat):
    best, stats = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        stats = simulate(config, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, stats


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--events", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)

    params = SystemParams()
    q = individual_equilibrium(params).q_star
    config = SimConfig(params, q, max_events=args.events, seed=args.seed)

    results = {}
    for backend in available_backends():
        elapsed, stats = best_time(config, backend, args.repeat)
        results[backend] = (elapsed, stats)
        print(f"{backend:>8}: {elapsed:8.3f} s  ({args.events / elapsed / 1e6:6.2f} M events/s)")

    if len(results) == 2:
        (tc, sc), (tp, sp) = results["cython"], results["python"]
        print(f" speedup: {tp / tc:8.1f}x")
        print(f"identical results: {sc == sp}")


if __name__ == "__main__":
    main()
