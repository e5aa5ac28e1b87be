"""Time the numba and numpy kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both implementations are called directly, so the ``PHASEADJ_DISABLE_NUMBA``
flag does not matter here.  Each numba kernel is run once before timing to
keep compilation out of the numbers.
"""
import argparse
import timeit

import numpy as np

from phaseadj import kernels


def chain_inputs(rows, n, rng):
    d = np.sort(rng.uniform(0.05, 1.0, (rows, n)), axis=1)[:, ::-1].copy()
    d[:, 0] = np.minimum(d[:, 0], d[:, 1:].sum(axis=1))
    theta = rng.uniform(0, 2 * np.pi, (rows, n))
    ref = rng.uniform(0, 2 * np.pi, (rows, n))
    return d, theta, ref, np.full(rows, n, dtype=np.int64)


def pattern_inputs(n, k, rng):
    x = np.sort(rng.uniform(0, 10, n))
    s = np.sin(np.radians(np.linspace(-90, 90, 3601)))
    w = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    return x, s, w


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    print(f"{'kernel':<34}{'numba ms':>10}{'numpy ms':>10}{'ratio':>8}")
    for rows, n in [(64, 16), (64, 64), (1000, 32)]:
        d, th, ref, counts = chain_inputs(rows, n, rng)
        kernels._chain_rows_numba(d, th, ref, counts)
        a = best_of(lambda: kernels._chain_rows_numba(d, th, ref, counts), args.repeat)
        b = best_of(lambda: kernels._chain_rows_numpy(d, th, ref, counts), args.repeat)
        print(f"{f'chain {rows} rows x {n} edges':<34}{a * 1e3:>10.2f}{b * 1e3:>10.2f}{b / a:>8.1f}")
    for n, k in [(16, 1), (64, 64), (256, 16)]:
        x, s, w = pattern_inputs(n, k, rng)
        kernels._pattern_power_numba(x, s, w)
        a = best_of(lambda: kernels._pattern_power_numba(x, s, w), args.repeat)
        b = best_of(lambda: kernels._pattern_power_numpy(x, s, w), args.repeat)
        print(f"{f'pattern N={n}, {k} weights':<34}{a * 1e3:>10.2f}{b * 1e3:>10.2f}{b / a:>8.1f}")


if __name__ == "__main__":
    main()
