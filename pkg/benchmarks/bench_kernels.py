"""Time the numba and numpy versions of every kernel against each other.

    python benchmarks/bench_kernels.py [--n 17 51 102] [--repeat 200]

Each kernel is called once before timing so numba compilation is excluded.
The two versions are also checked for agreement on the benchmark inputs.
"""

import argparse
import time

import numpy as np

from toepcov import kernels


def _inputs(name, n, rng):
    if name == "toeplitz_from_row":
        row = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        row[0] = abs(row[0]) + n
        return (row,)
    if name == "diagonal_means":
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return (a @ a.conj().T,)
    if name == "lag_correlations":
        q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        return (q,)
    if name == "gohberg_semencul":
        p = 0.3 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / n
        p[0] = 1.0
        return (p,)
    if name == "box_muller":
        return (rng.random(n * 100), rng.random(n * 100))
    raise KeyError(name)


def best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, nargs="+", default=[17, 51, 102])
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    names = ("toeplitz_from_row", "diagonal_means", "lag_correlations",
             "gohberg_semencul", "box_muller")
    print(f"numba available: {kernels.HAVE_NUMBA}; active backend: {kernels.BACKEND}")
    print(f"{'kernel':<20}{'n':>5}{'numba [us]':>13}{'numpy [us]':>13}{'speedup':>9}"
          f"{'max diff':>11}")
    for name in names:
        fast, ref = kernels.implementations(name)
        for n in args.n:
            inputs = _inputs(name, n, rng)
            a, b = fast(*inputs), ref(*inputs)  # warm-up / compile
            diff = float(np.max(np.abs(a - b)))
            t_fast = best_of(fast, inputs, args.repeat)
            t_ref = best_of(ref, inputs, args.repeat)
            print(f"{name:<20}{n:>5}{t_fast * 1e6:>13.1f}{t_ref * 1e6:>13.1f}"
                  f"{t_ref / t_fast:>9.1f}{diff:>11.1e}")


if __name__ == "__main__":
    main()
