"""Benchmark the O(n^3) hot kernels: compiled core vs numpy fallback.

Run from the repository root:

    PYTHONPATH=src python3 bench/benchmark_kernels.py

The compiled backend is included only when it has been built
(`python3 setup.py build_ext --inplace`).
"""

import time

import numpy as np

from rectiflat import _kernels_py

BACKENDS = {"python": _kernels_py}
try:
    from rectiflat import _kernels_cy

    BACKENDS["cython"] = _kernels_cy
except ImportError:
    pass

KERNELS = ("excess_sum_max", "excess_through_points",
           "excess_through_pairs", "triangle_violation")


def _problem(n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(D, 0.0)
    return np.ascontiguousarray(D), np.full(n, 1.0 / n)


def _time(fn, *args, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    sizes = (64, 128, 256, 512)
    print(f"{'kernel':<24}{'n':>6}" + "".join(f"{b:>12}" for b in BACKENDS)
          + ("     speedup" if len(BACKENDS) > 1 else ""))
    for name in KERNELS:
        for n in sizes:
            D, w = _problem(n)
            row = f"{name:<24}{n:>6}"
            times = {}
            for bname, mod in BACKENDS.items():
                fn = getattr(mod, name)
                args = (D,) if name == "triangle_violation" else (D, w)
                times[bname] = _time(fn, *args)
                row += f"{times[bname]:>11.4f}s"
            if len(times) > 1:
                row += f"{times['python'] / times['cython']:>11.1f}x"
            print(row)
    if "cython" not in BACKENDS:
        print("\ncompiled core not built; run: python3 setup.py build_ext --inplace")


if __name__ == "__main__":
    main()
