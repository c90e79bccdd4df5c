"""Compare the compiled and pure-Python trace kernels on full R_n(F_q) sweeps.

    python benchmarks/bench_kernels.py --cases 31:3 61:3 13:5 --repeat 3
"""
import argparse
import time

import numpy as np

from satotate import kernels
from satotate.ffield import field_make
from satotate.moments import rn_size


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", nargs="+", default=["31:3", "61:3", "13:5", "23:4"],
                    help="q:n pairs")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if kernels.compiled is None:
        print("compiled backend unavailable; build the extension with `pip install -e .`")
        return 1
    print(f"{'q':>4} {'n':>2} {'tuples':>10} {'cython s':>10} {'python s':>10} {'speedup':>8}")
    for case in args.cases:
        q, n = map(int, case.split(":"))
        shift, mul, chi = kernels.field_tables(field_make(q))
        total = rn_size(q, n)
        tc, hc = best_time(lambda: kernels.trace_counts(0, total, n, shift, mul, chi,
                                                        impl=kernels.compiled), args.repeat)
        tp, hp = best_time(lambda: kernels.trace_counts(0, total, n, shift, mul, chi,
                                                        impl=kernels.python), args.repeat)
        if not np.array_equal(hc, hp):
            raise SystemExit(f"backends disagree at q={q} n={n}")
        print(f"{q:>4} {n:>2} {total:>10} {tc:>10.4f} {tp:>10.4f} {tp / tc:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
