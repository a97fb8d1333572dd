#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Each kernel runs on the same inputs under both paths; results are compared
for equality before any timing is reported. The first numba call (JIT
compilation, or loading the on-disk cache) is excluded from the timings.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat R] [--n N] [--seed S]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from mkcslab import _kernels
from mkcslab.language import codebook


def _best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(n_ann: int, seed: int):
    rng = np.random.default_rng(seed)
    book = codebook(14, 19)
    V14 = np.ascontiguousarray(book.vectors)
    A10 = rng.integers(0, 2, size=(10, 14)).astype(np.int64)
    y = A10 @ V14[-1]
    book8 = codebook(8, 20)
    V8 = np.ascontiguousarray(book8.vectors)
    W = np.where(rng.integers(0, 2, size=(3, 8)) == 1, 1, -1).astype(np.int64)
    x = rng.integers(-2, 3, size=n_ann).astype(np.int64)
    x[0] = 1
    return [
        (f"annihilator_count n={n_ann}", "annihilator_count", (x,)),
        (f"matvec_rows {V8.shape[0]}x8 by 3x8", "matvec_rows", (V8, W)),
        (f"null_mask {V14.shape[0]}x14 by 10x14", "null_mask", (V14, A10)),
        (f"first_match {V14.shape[0]}x14 (last row)", "first_match", (V14, A10, y)),
    ]


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=20, help="length for the annihilator sweep")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _kernels.numba_kernels is None:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1
    np_k, nb_k = _kernels.numpy_kernels, _kernels.numba_kernels

    print(f"{'kernel':<40} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}")
    print("-" * 73)
    for label, name, inputs in _cases(args.n, args.seed):
        f_np, f_nb = getattr(np_k, name), getattr(nb_k, name)
        a, b = f_np(*inputs), f_nb(*inputs)  # also warms up the JIT
        same = np.array_equal(np.asarray(a), np.asarray(b))
        if not same:
            print(f"{label}: results differ between paths", file=sys.stderr)
            return 1
        t_np = _best_of(lambda: f_np(*inputs), args.repeat)
        t_nb = _best_of(lambda: f_nb(*inputs), args.repeat)
        print(f"{label:<40} {t_np * 1e3:>11.3f} {t_nb * 1e3:>11.3f} {t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
