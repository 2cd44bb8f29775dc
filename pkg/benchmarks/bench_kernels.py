"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on the same inputs in both backends and the results are
checked for agreement before timings are reported.
"""
import argparse
import timeit

import numpy as np

from weaksing import _pykernels as py

try:
    from weaksing import _kernels as cy
except ImportError:  # extension not built
    cy = None

XG, WG = np.polynomial.legendre.leggauss(32)


def cases(k):
    lam = 0.5
    targets = np.linspace(0.01, 0.9, 64)
    return {
        "quad_w (I, m=1, W=3)": lambda: k.quad_w(k.KIND_I, 1.0, 3.0, lam, XG, WG, 1e-12, 16),
        "quad_w (J, M=5, W=2)": lambda: k.quad_w(k.KIND_J, 5.0, 2.0, lam, XG, WG, 1e-12, 16),
        "invert_w (64 targets)": lambda: k.invert_w(k.KIND_I, 1.0, targets, lam, 3.0, XG, WG, 1e-12, 16),
        "dopri_segment (1/2 period)": lambda: k.dopri_segment(35.0, 35.0, lam, 0.0, 0.5, 5.68, -3.78, 1e-12,
                                                               1e-12, 0.0, 1e-8, np.linspace(0.05, 0.5, 10),
                                                               100_000),
    }


def flat(x):
    parts = x if isinstance(x, tuple) else (x,)
    return np.concatenate([np.atleast_1d(np.asarray(v, dtype=float)) for v in parts])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", py)] + ([("cython", cy)] if cy is not None else [])
    if cy is None:
        print("compiled extension not available; timing the fallback only")
    runs = {name: cases(mod) for name, mod in backends}
    print(f"{'kernel':<28}" + "".join(f"{name:>14}" for name, _ in backends) + ("     speedup" if cy else ""))
    for label in runs["python"]:
        if cy is not None:
            a, b = flat(runs["python"][label]()), flat(runs["cython"][label]())
            assert a.shape == b.shape and np.allclose(a, b, rtol=1e-11, atol=1e-13), label
        times = []
        for name, _ in backends:
            fn = runs[name][label]
            n, _ = timeit.Timer(fn).autorange()
            best = min(timeit.repeat(fn, number=n, repeat=args.repeat)) / n
            times.append(best)
        row = f"{label:<28}" + "".join(f"{t * 1e3:>11.3f} ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
