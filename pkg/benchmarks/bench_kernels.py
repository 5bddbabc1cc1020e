"""Compare the compiled and numpy kernel backends on pool sizes seen in practice.

    python benchmarks/bench_kernels.py [--sizes 200 800 1440] [--dim 1024] [--repeat 3]

The compiled module is imported directly, so both backends run in one process
regardless of ``MCTL_PURE_PYTHON``.
"""
import argparse
import timeit

import numpy as np

from mctl import _pykernels

try:
    from mctl import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[200, 800, 1440])
    p.add_argument("--dim", type=int, default=64, help="feature dimension (1024 for 32x32 images)")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if _ckernels is None:
        raise SystemExit("compiled backend missing: run `pip install -e . --no-build-isolation` first")

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<14}{'n':>6}{'python ms':>12}{'cython ms':>12}{'speedup':>9}")
    for n in args.sizes:
        X = rng.standard_normal((args.dim, n))
        cases = {
            "sq_dists": lambda m: m.sq_dists(X, X),
            "gaussian": lambda m: m.gaussian_gram(X, X, 1.0),
            "knn": lambda m: m.knn_adjacency(X, args.k),
        }
        for name, call in cases.items():
            a, b = call(_pykernels), call(_ckernels)
            # exp() may differ in the last ulp; distances and graphs must match exactly
            same = np.allclose(a, b, rtol=1e-14, atol=0) if name == "gaussian" else np.array_equal(a, b)
            if not same:
                raise SystemExit(f"{name}: backends disagree at n={n}")
            tp = bench(lambda: call(_pykernels), args.repeat)
            tc = bench(lambda: call(_ckernels), args.repeat)
            print(f"{name:<14}{n:>6}{1e3 * tp:>12.2f}{1e3 * tc:>12.2f}{tp / tc:>9.2f}")


if __name__ == "__main__":
    main()
