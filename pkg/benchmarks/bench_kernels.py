#!/usr/bin/env python3
"""Benchmark the distance-field kernel backends (compiled vs numpy).

The kernel dominates landmark stroking, the one bespoke per-pixel loop in the
package. Workloads mirror the real call pattern: six facial contours stroked
over square rasters at a 20-pixel implant grid.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from provisim._kernels import available_backends
from provisim.trial.fixtures import PEOPLE, render_face


def face_contours(size):
    """Realistic contour vertex sets, in sample coordinates of a size^2 raster."""
    _, doc = render_face(PEOPLE[0], "happy", 160)
    points = np.asarray(doc["points"], dtype=np.float64)
    contours = []
    for entry in doc["contours"].values():
        verts = points[np.asarray(entry["indices"], dtype=np.intp)] * size
        contours.append((verts, entry["closed"]))
    return contours


def run_workload(fn, contours, size, band):
    for verts, closed in contours:
        fn(verts, closed, size, size, band)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("note: compiled kernel not built (python3 setup.py build_ext --inplace)")

    print(f"{'raster':>8} {'band px':>8}", *(f"{name:>12}" for name in backends), f"{'speedup':>9}")
    for size in (200, 400, 800, 1600):
        # 0.7 implant-pixel stroke on a 20 px grid, plus the anti-alias margin
        band = 0.7 * (size / 20.0) / 2.0 + 1.5
        contours = face_contours(size)
        timings = {}
        for name, fn in backends.items():
            run_workload(fn, contours, size, band)  # warm-up
            best = min(
                _timed(run_workload, fn, contours, size, band)
                for _ in range(args.repeats)
            )
            timings[name] = best
        speedup = (
            f"{timings['numpy'] / timings['compiled']:8.1f}x"
            if "compiled" in timings
            else "      n/a"
        )
        print(
            f"{size:>8} {band:>8.1f}",
            *(f"{timings[name] * 1000:>10.2f}ms" for name in backends),
            speedup,
        )


def _timed(fn, *args):
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


if __name__ == "__main__":
    main()
