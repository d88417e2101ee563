#!/usr/bin/env python3
"""Compare the compiled elimination kernel against the pure-Python fallback.

Times `row_reduce` (the hot loop under encode, decode, and repair) on square
systems of growing size, plus one realistic end-to-end repair, for both
backends.  Run from a checkout:

    python3 benchmarks/bench_kernels.py [--sizes 64,128,256] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from zzmr import CodeParams, RepairScenario, encode, generate_data, repair
from zzmr import linalg


def time_row_reduce(backend: str, size: int, q: int, repeats: int) -> float:
    rng = np.random.default_rng(size)
    best = float("inf")
    for _ in range(repeats):
        a = rng.integers(0, q, size=(size, size), dtype=np.int64)
        start = time.perf_counter()
        linalg.row_reduce(a, q, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def time_repair(backend: str, repeats: int) -> float:
    params = CodeParams.build(6, 2, 3, 2, q=11)
    cw = encode(params, generate_data(params, seed=5))
    scen = RepairScenario.plan(params, [0, 1])
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = repair(params, scen, cw)
        best = min(best, time.perf_counter() - start)
        assert out.optimal
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="64,128,256,512",
                        help="comma-separated matrix sizes")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--modulus", type=int, default=1_000_003)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    names = sorted(linalg.backends())
    if len(names) < 2:
        print(f"only the {names[0]} backend is available; timing it alone")

    print(f"\nrow_reduce over GF({args.modulus}), best of {args.repeats}:")
    print(f"{'size':>6} " + " ".join(f"{n:>12}" for n in names) + "   speedup")
    for size in sizes:
        times = {n: time_row_reduce(n, size, args.modulus, args.repeats)
                 for n in names}
        ratio = (f"{times['python'] / times['compiled']:8.1f}x"
                 if len(names) == 2 else "")
        print(f"{size:>6} "
              + " ".join(f"{times[n] * 1e3:10.2f}ms" for n in names)
              + f"  {ratio}")

    print(f"\nfull cooperative repair (6,2,3,2) over GF(11), "
          f"best of {args.repeats}:")
    default = linalg._active
    try:
        for name in names:
            linalg._active = linalg.backends()[name]
            elapsed = time_repair(name, args.repeats)
            print(f"  {name:>9}: {elapsed * 1e3:8.2f} ms")
    finally:
        linalg._active = default


if __name__ == "__main__":
    main()
