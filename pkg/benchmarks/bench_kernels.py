"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 2,3,5,8,16] [--repeat 5]

Both backends are imported directly, so the environment variable that picks
the runtime backend has no effect here.
"""

import argparse
import timeit

import numpy as np

from gyromat.matker import _pykernels

try:
    from gyromat.matker import _kernels
except ImportError:
    _kernels = None


def cases(kernels, n, rng):
    A = rng.standard_normal((n, n))
    P = A @ A.T + n * np.eye(n)
    W = rng.standard_normal((n, n))
    W = W + W.T
    return {
        "eigh": lambda: kernels.eigh(P),
        "funm log": lambda: kernels.funm_sym(P, kernels.FN_LOG),
        "frechet log": lambda: kernels.frechet_sym(P, W, kernels.FN_LOG),
        "cholesky": lambda: kernels.cholesky(P),
    }


def per_call(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="2,3,5,8,16")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled kernels are not built; run pip install -e . --no-build-isolation")

    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'kernel':<12} {'n':>3} {'python us':>10} {'cython us':>10} {'speedup':>8}")
    for n in sizes:
        py = cases(_pykernels, n, np.random.default_rng(n))
        cy = cases(_kernels, n, np.random.default_rng(n))
        for name in py:
            t_py = per_call(py[name], args.repeat)
            t_cy = per_call(cy[name], args.repeat)
            print(f"{name:<12} {n:>3} {t_py * 1e6:>10.1f} {t_cy * 1e6:>10.1f} {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
