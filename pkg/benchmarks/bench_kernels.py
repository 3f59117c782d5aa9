"""Benchmark the compiled walk/SGNS kernels against the numpy reference.

Times second-order biased walk generation and skip-gram training on a
dense synthetic weight matrix at a size typical for one experiment run.

    python3 benchmarks/bench_kernels.py --nodes 300
"""

import argparse
import time

import numpy as np

from ciprop._kernels import _reference

try:
    from ciprop._kernels import _compiled
except ImportError:
    _compiled = None


def _weights(rng, d):
    a = rng.uniform(-0.3, 0.3, size=(d, d))
    p = (a + a.T) / 2.0
    np.fill_diagonal(p, 0.0)
    return np.exp(1.5 * p) / np.exp(1.5 * 0.3)


def _best_of(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _noise_cdf(walks, n_nodes):
    counts = np.bincount(walks.ravel(), minlength=n_nodes).astype(np.float64)
    noise = counts**0.75
    cdf = np.cumsum(noise / noise.sum())
    cdf[-1] = 1.0
    return cdf


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=300)
    parser.add_argument("--walk-length", type=int, default=40)
    parser.add_argument("--walks-per-node", type=int, default=10)
    parser.add_argument("--dimension", type=int, default=64)
    parser.add_argument("--window", type=int, default=5)
    parser.add_argument("--negative", type=int, default=5)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    W = _weights(rng, args.nodes)
    print(
        f"nodes={args.nodes} walk_length={args.walk_length} "
        f"walks_per_node={args.walks_per_node} dim={args.dimension} "
        f"epochs={args.epochs} (best of {args.repeats})"
    )
    if _compiled is None:
        print("compiled extension not built; timing the reference only")

    results = {}
    backends = [("python", _reference)] + ([("compiled", _compiled)] if _compiled else [])
    walks = None
    for name, impl in backends:
        t_walk, walks = _best_of(
            lambda: impl.biased_walks(
                W, args.walk_length, args.walks_per_node, 1.0, 2.0, args.seed
            ),
            args.repeats,
        )
        results[name] = {"walks": t_walk}

    cdf = _noise_cdf(walks, args.nodes)
    base0 = (rng.random((args.nodes, args.dimension)) - 0.5) / args.dimension
    for name, impl in backends:

        def run():
            syn0 = base0.copy()
            syn1 = np.zeros_like(syn0)
            impl.sgns_train(
                walks, args.nodes, args.dimension, args.window, args.negative,
                args.epochs, 0.025, 0.025e-4, cdf, args.seed, syn0, syn1,
            )
            return syn0

        results[name]["sgns"], _ = _best_of(run, args.repeats)

    for kernel in ("walks", "sgns"):
        py = results["python"][kernel]
        line = f"{kernel:>6}: python {py:8.3f}s"
        if _compiled:
            cy = results["compiled"][kernel]
            line += f"   compiled {cy:8.3f}s   speedup {py / cy:6.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
