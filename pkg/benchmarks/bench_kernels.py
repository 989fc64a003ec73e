"""Benchmark: compiled raster kernels vs the pure-Python fallback.

Run:  python3 benchmarks/bench_kernels.py [--size 256] [--repeat 5]

Both implementations are invoked on identical inputs and their outputs are
verified byte-identical before timing, so the speedup numbers compare the
same work.
"""

from __future__ import annotations

import argparse
import math
import random
import time

from caise import _purekernels as pure

try:
    from caise import _fastkernels as fast
except ImportError:
    fast = None


def _time(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256, help="square image side")
    parser.add_argument("--repeat", type=int, default=5, help="runs per timing (min)")
    args = parser.parse_args()

    if fast is None:
        print("compiled kernels are not built; run pip install -e . with Cython")
        return 1

    n = args.size
    rng = random.Random(0)
    pixels = bytes(rng.randrange(256) for _ in range(n * n * 3))
    theta = math.radians(33.0)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    out_w = int(math.ceil(abs(n * cos_t) + abs(n * sin_t)))
    out_h = out_w

    cases = []

    cases.append((
        f"rotate_pixels {n}x{n} by 33deg",
        lambda: pure.rotate_pixels(pixels, n, n, cos_t, sin_t, out_w, out_h),
        lambda: fast.rotate_pixels(pixels, n, n, cos_t, sin_t, out_w, out_h),
    ))

    cases.append((
        f"cutout_scores {n}x{n}",
        lambda: pure.cutout_scores(pixels, n * n, 128, 128, 128),
        lambda: fast.cutout_scores(pixels, n * n, 128, 128, 128),
    ))

    scores, _hist = pure.cutout_scores(pixels, n * n, 128, 128, 128)
    threshold = 110
    cases.append((
        f"largest_component_mask {n}x{n}",
        lambda: pure.largest_component_mask(scores, n, n, threshold),
        lambda: fast.largest_component_mask(scores, n, n, threshold),
    ))

    mask, _count = pure.largest_component_mask(scores, n, n, threshold)
    cases.append((
        f"apply_mask {n}x{n}",
        lambda: pure.apply_mask(pixels, mask),
        lambda: fast.apply_mask(pixels, mask),
    ))

    print(f"{'kernel':36}{'pure':>12}{'fast':>12}{'speedup':>10}")
    for name, run_pure, run_fast in cases:
        a, b = run_pure(), run_fast()
        if isinstance(a, tuple):
            same = all(
                list(x) == list(y) if not isinstance(x, (bytes, int)) else x == y
                for x, y in zip(a, b)
            )
        else:
            same = a == b
        if not same:
            print(f"{name:36}  OUTPUT MISMATCH — not timing unequal work")
            return 1
        tp = _time(run_pure, args.repeat)
        tf = _time(run_fast, args.repeat)
        print(f"{name:36}{1000 * tp:>10.2f}ms{1000 * tf:>10.2f}ms{tp / tf:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
