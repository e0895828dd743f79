"""Time the compiled ascent kernel against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--mu 2 3] [--restarts 4] [--seed 0]

Both kernels run the same restarts; the table lists wall time per restart,
the best phi and the speed-up.
"""
import argparse
import time

import numpy as np

from terpgeom import _backend


def time_kernel(kern, mu, restarts, seed):
    best = -np.inf
    start = time.perf_counter()
    for i in range(restarts):
        x0 = np.random.default_rng([seed, i]).standard_normal(mu * (mu + 1))
        _, phi, _, _, feasible, _ = kern.ascend(x0, mu)
        if feasible:
            best = max(best, phi)
    return (time.perf_counter() - start) / restarts, best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--mu", type=int, nargs="+", default=[2, 3])
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    try:
        compiled = _backend.get("cython")
    except ImportError:
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    fallback = _backend.get("python")
    print(f"{'mu':>3} {'cython s/restart':>17} {'python s/restart':>17} {'speed-up':>9} {'best phi':>12}")
    for mu in args.mu:
        tc, bc = time_kernel(compiled, mu, args.restarts, args.seed)
        tp, bp = time_kernel(fallback, mu, args.restarts, args.seed)
        print(f"{mu:>3} {tc:>17.4f} {tp:>17.4f} {tp / tc:>9.0f} {max(bc, bp):>12.6f}")


if __name__ == "__main__":
    main()
