"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel and size with both timings, the speedup and the
largest difference between the two outputs.
"""
import argparse
import timeit

import numpy as np

from repdiff.kernels import backends


def flux_case(n, rng):
    rho = rng.random((n, n))
    v = rng.standard_normal((n, n))
    return (rho, v)


def drift_case(npart, rng):
    pos = rng.uniform(-8, 8, size=(npart, 1))
    dr = 1.0 / 64
    r = np.arange(2048) * dr
    table = 1.0 / np.maximum(r, 0.125) ** 2
    return (pos, 16.0, table, dr)


CASES = [
    ("upwind_flux_difference", flux_case, [128, 512, 1024]),
    ("pair_drift", drift_case, [500, 2000, 5000]),
]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    impls = backends()
    if "compiled" not in impls:
        print("compiled extension not built; only the numpy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':24s} {'size':>6s} {'numpy [ms]':>11s} {'compiled [ms]':>14s} "
          f"{'speedup':>8s} {'max diff':>10s}")
    for name, make, sizes in CASES:
        for size in sizes:
            case = make(size, rng)
            row = {}
            outs = {}
            for impl, mod in impls.items():
                fn = getattr(mod, name)
                outs[impl] = fn(*case)
                row[impl] = min(timeit.repeat(lambda: fn(*case), number=1,
                                              repeat=args.repeat)) * 1e3
            if "compiled" in row:
                diff = float(np.max(np.abs(outs["compiled"] - outs["numpy"])))
                print(f"{name:24s} {size:6d} {row['numpy']:11.3f} {row['compiled']:14.3f} "
                      f"{row['numpy'] / row['compiled']:8.1f} {diff:10.2e}")
            else:
                print(f"{name:24s} {size:6d} {row['numpy']:11.3f} {'-':>14s} {'-':>8s} {'-':>10s}")


if __name__ == "__main__":
    main()
