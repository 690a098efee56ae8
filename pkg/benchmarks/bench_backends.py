"""Compare the numba and numpy kernel backends.

Times the raw kernels on synthetic window queries and the full evaluator on
a long derivative trace, then prints one table with the speedup column.

    python3 benchmarks/bench_backends.py --n 200000 --repeats 7
"""

import argparse
import statistics
import time

import numpy as np

from stlrank import Trace, TraceSet, build, eval_fast
from stlrank.core import kernels


def timed(fn, repeats):
    runs = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def kernel_inputs(rng, n):
    vals = rng.random(n) < 0.5
    f2 = rng.random(n) < 0.3
    times = np.arange(n, dtype=np.float64)
    lo = np.arange(n, dtype=np.int64)
    hi = np.minimum(lo + 5, n - 1)
    return vals, f2, times, lo, hi


def eval_traceset(rng, n):
    pos = np.cumsum(rng.normal(0, 0.4, size=n)) + 50.0
    x = Trace("x", np.arange(n, dtype=np.int64), pos)
    d1 = Trace("d1(x)", np.arange(n - 1, dtype=np.int64), np.diff(pos))
    return TraceSet([x, d1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="array length")
    ap.add_argument("--repeats", type=int, default=7, help="runs per timing (median)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "numba" not in backends:
        print("numba backend not available; timing numpy only")

    rng = np.random.default_rng(args.seed)
    vals, f2, times, lo, hi = kernel_inputs(rng, args.n)
    w = eval_traceset(rng, args.n)
    spec = build("flat_start")

    rows = []
    results = {}
    cases = [
        ("window_any", lambda impl: impl["window_any"](vals, lo, hi)),
        ("window_all", lambda impl: impl["window_all"](vals, lo, hi)),
        ("until_scan", lambda impl: impl["until_scan"](vals, f2, lo, hi, False)),
        ("shift_bounds", lambda impl: impl["shift_bounds"](times, 0.0, 3.0)),
    ]
    for name, call in cases:
        per_backend = {}
        for backend in backends:
            impl = kernels.backend_impl(backend)
            call(impl)  # warm the jit before timing
            per_backend[backend] = timed(lambda: call(impl), args.repeats)
        rows.append((f"kernel {name}", per_backend))

    per_backend = {}
    prev = kernels.active_backend()
    try:
        for backend in backends:
            kernels.use_backend(backend)
            eval_fast(spec.formula, w)
            per_backend[backend] = timed(
                lambda: eval_fast(spec.formula, w), args.repeats
            )
    finally:
        kernels.use_backend(prev)
    rows.append(("eval flat_start", per_backend))

    print(f"n = {args.n}, median of {args.repeats} runs, times in ms")
    header = f"{'case':<20}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for name, per_backend in rows:
        line = f"{name:<20}"
        for backend in backends:
            line += f"{per_backend[backend] * 1e3:>12.3f}"
        if len(backends) > 1:
            line += f"{per_backend['numpy'] / per_backend['numba']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
