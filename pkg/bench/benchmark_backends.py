"""Compare the compiled and pure-numpy backends on the two hot kernels.

Usage: python3 bench/benchmark_backends.py [--nodes N] [--obs N] [--repeats K]
"""

import argparse
import time

import numpy as np

from prmix._backend import get_impl


def time_recursion(impl, nodes, obs, repeats):
    rng = np.random.default_rng(0)
    p1 = rng.uniform(-3.0, 3.0, size=nodes)
    p2 = rng.uniform(0.3, 2.5, size=nodes)
    xs = rng.normal(size=obs)
    ws = (np.arange(1, obs + 1) + 1.0) ** -0.67
    # warm-up pass absorbs any compilation cost
    lw = np.full(nodes, -np.log(nodes))
    impl.pr_recurse(0, p1, p2, lw, xs[:10], ws[:10])
    best = np.inf
    for _ in range(repeats):
        lw = np.full(nodes, -np.log(nodes))
        t0 = time.perf_counter()
        impl.pr_recurse(0, p1, p2, lw, xs, ws)
        best = min(best, time.perf_counter() - t0)
    return best


def time_pava(impl, cells, repeats):
    rng = np.random.default_rng(1)
    y = rng.normal(size=cells)
    w = rng.uniform(0.1, 2.0, size=cells)
    impl.pava_decreasing(y[:10], w[:10])
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        impl.pava_decreasing(y, w)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=1600)
    parser.add_argument("--obs", type=int, default=2000)
    parser.add_argument("--cells", type=int, default=100_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    results = {}
    for name in ("numpy", "numba"):
        try:
            impl = get_impl(name)
        except ImportError:
            print(f"{name}: unavailable")
            continue
        rec = time_recursion(impl, args.nodes, args.obs, args.repeats)
        pav = time_pava(impl, args.cells, args.repeats)
        results[name] = (rec, pav)
        print(f"{name:>6}: recursion {rec * 1e3:8.2f} ms "
              f"({args.obs} obs x {args.nodes} nodes), "
              f"isotonic fit {pav * 1e3:8.2f} ms ({args.cells} cells)")
    if len(results) == 2:
        r = results["numpy"][0] / results["numba"][0]
        p = results["numpy"][1] / results["numba"][1]
        print(f"speedup: recursion {r:.1f}x, isotonic fit {p:.1f}x")


if __name__ == "__main__":
    main()
