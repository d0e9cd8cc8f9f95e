#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--frames N]

Measures the per-frame hot path: CSI record unpack/pack, magnitude and
phase conversion, channel synthesis and quantization.
"""

import argparse
import time

import numpy as np

from axcsi._kernels import _ref

try:
    from axcsi._kernels import _fast
except ImportError:
    _fast = None


def bench(fn, args, repeat):
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for a in args:
            fn(*a)
        best = min(best, (time.perf_counter() - t0) / len(args))
    return best * 1e6  # us per call


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--frames", type=int, default=2000)
    opts = parser.parse_args()

    rng = np.random.default_rng(0)
    n = opts.frames
    blobs = [rng.integers(0, 256, 4296, dtype=np.uint8).tobytes()
             for _ in range(min(n, 256))]
    fields = [_ref.unpack_csi_frame(b) for b in blobs]
    iq = [(rng.integers(-30000, 30000, 512, dtype=np.int64).astype(np.int32),
           rng.integers(-30000, 30000, 512, dtype=np.int64).astype(np.int32))
          for _ in range(min(n, 256))]
    taps = [(rng.integers(0, 64, 4), rng.normal(size=4) + 1j * rng.normal(size=4),
             512, 512) for _ in range(64)]
    floats = [(rng.normal(scale=20000, size=512), rng.normal(scale=20000, size=512))
              for _ in range(min(n, 256))]

    cases = [
        ("unpack_csi_frame", [(b,) for b in blobs]),
        ("pack_csi_frame", [tuple(f) for f in fields]),
        ("mag_phase", iq),
        ("channel_response", taps),
        ("quantize_iq", floats),
    ]

    print(f"{'kernel':<20} {'python us':>10} {'cython us':>10} {'speedup':>8}")
    for name, args in cases:
        t_ref = bench(getattr(_ref, name), args, n)
        if _fast is None:
            print(f"{name:<20} {t_ref:>10.2f} {'n/a':>10} {'n/a':>8}")
            continue
        t_fast = bench(getattr(_fast, name), args, n)
        print(f"{name:<20} {t_ref:>10.2f} {t_fast:>10.2f} {t_ref / t_fast:>7.1f}x")

    if _fast is None:
        print("\ncompiled backend not built; showing fallback only")


if __name__ == "__main__":
    main()
