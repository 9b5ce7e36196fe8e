"""Time the compiled SGM kernel against the pure-Python fallback.

Usage::

    python3 benchmarks/bench_sgm.py [--n 2000] [--D 200] [--epochs 3] [--repeats 3]

Both backends run the same problem and the script checks that their
averaged iterates agree before reporting timings.
"""

import argparse
import time

import numpy as np

from rffsgm import _backend
from rffsgm.rff import sample_map
from rffsgm.sgm import SgmConfig, train_features


def best_time(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--D", type=int, default=200)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args(argv)

    rng = np.random.default_rng(0)
    X = rng.standard_normal((args.n, args.d))
    y = np.where(X[:, 0] * X[:, 1] > 0, 1.0, -1.0)
    Z = sample_map(args.d, args.D, 1.0 / args.d, seed=0).transform(X)
    cfg = SgmConfig(eta=0.05, epochs=args.epochs)
    steps = args.n * args.epochs
    print(f"n={args.n} D={args.D} (dim {2 * args.D}) epochs={args.epochs} steps={steps}")

    results = {}
    for backend in ("python", "compiled"):
        if backend == "compiled" and _backend.compiled_sgm_pass is None:
            print("compiled: extension not built, skipped")
            continue
        seconds, model = best_time(lambda: train_features(Z, y, cfg, backend=backend), args.repeats)
        results[backend] = (seconds, model)
        print(f"{backend:>9}: {seconds * 1e3:9.2f} ms  ({steps / seconds:,.0f} steps/s)")

    if len(results) == 2:
        diff = float(np.max(np.abs(results["python"][1].w_bar - results["compiled"][1].w_bar)))
        print(f"speedup: {results['python'][0] / results['compiled'][0]:.1f}x, max |w_bar difference| = {diff:.2e}")


if __name__ == "__main__":
    main()
