#!/usr/bin/env python3
"""Time the jit kernels against the pure-numpy fallback.

Each hot kernel runs in both dispatch modes on realistic sizes; the
outputs are checked for agreement and a small table is printed.  The
fallback is selected the same way production code selects it, through
HOOPCUT_DISABLE_NUMBA, so this measures exactly what users get.
"""

import argparse
import os
import sys
import time

import numpy as np

from hoopcut import _kernels
from hoopcut.learning import enumerate_weight_grid, grid_matrix
from hoopcut.loudness import default_cascade_48k


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def in_mode(disable_numba, fn, repeat):
    prev = os.environ.get("HOOPCUT_DISABLE_NUMBA")
    os.environ["HOOPCUT_DISABLE_NUMBA"] = "1" if disable_numba else ""
    try:
        fn()  # warm once so jit compilation stays out of the timing
        return timed(fn, repeat)
    finally:
        if prev is None:
            del os.environ["HOOPCUT_DISABLE_NUMBA"]
        else:
            os.environ["HOOPCUT_DISABLE_NUMBA"] = prev


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seconds", type=float, default=10.0,
                    help="length of synthetic 48 kHz audio to filter")
    ap.add_argument("--pairs", type=int, default=750,
                    help="A/B pair count for the grid-match kernel")
    ap.add_argument("--step", type=float, default=0.05,
                    help="weight grid step for the grid-match kernel")
    ap.add_argument("--repeat", type=int, default=5,
                    help="best-of repetitions per measurement")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    audio = rng.standard_normal(int(48_000 * args.seconds))
    stages = default_cascade_48k().stages
    md = rng.standard_normal((args.pairs, 5))
    grid = grid_matrix(enumerate_weight_grid(args.step))

    cases = [
        (f"biquad_cascade ({len(audio)} samples, {len(stages)} stages)",
         lambda: _kernels.biquad_cascade(audio, stages)),
        (f"window_mean_square ({len(audio)} samples, win 19200 hop 4800)",
         lambda: _kernels.window_mean_square(audio, 19_200, 4_800)),
        (f"count_matches ({args.pairs} pairs x {len(grid)} grid points)",
         lambda: _kernels.count_matches(md, grid)),
    ]

    if not _kernels.HAS_NUMBA:
        print("numba is not installed; timing the numpy fallback only")
        for name, fn in cases:
            _, t = in_mode(True, fn, args.repeat)
            print(f"{name:58s} {t * 1e3:9.2f} ms")
        return 0

    header = f"{'kernel':58s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s} {'max|diff|':>10s}"
    print(header)
    print("-" * len(header))
    worst = 0.0
    for name, fn in cases:
        ref, t_np = in_mode(True, fn, args.repeat)
        out, t_nb = in_mode(False, fn, args.repeat)
        diff = float(np.max(np.abs(np.asarray(out, dtype=float)
                                   - np.asarray(ref, dtype=float))))
        worst = max(worst, diff)
        print(f"{name:58s} {t_np * 1e3:8.2f} ms {t_nb * 1e3:8.2f} ms "
              f"{t_np / t_nb:7.1f}x {diff:10.2e}")
    if worst > 1e-9:
        print(f"dispatch paths disagree: max deviation {worst:.3e}", file=sys.stderr)
        return 1
    print("paths agree within 1e-9")
    return 0


if __name__ == "__main__":
    sys.exit(main())
