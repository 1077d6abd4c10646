#!/usr/bin/env python3
"""Benchmark the twin kernel backends: pure numpy vs. numba @njit.

Each hot kernel runs on both backends over a sweep of problem sizes; the
script verifies the routes agree, excludes JIT compilation via a warmup
call, and prints a timing table with speedups.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats N] [--quick]

The active backend used by the library is chosen by SCENESKETCH_KERNELS
(auto | numba | numpy); this script always times both explicitly.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from scenesketch.kernels import (HAVE_NUMBA, count_points_in_union,
                                 heatmap_accumulate, mixture_density_grid)


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _row(name: str, size: str, fn_numpy, fn_numba, repeats: int) -> dict:
    reference = fn_numpy()
    t_numpy = _time(fn_numpy, repeats)
    row = {"kernel": name, "size": size, "numpy_ms": t_numpy * 1e3,
           "numba_ms": None, "speedup": None}
    if HAVE_NUMBA:
        result = fn_numba()  # warmup: compile outside the timed region
        np.testing.assert_allclose(np.asarray(result, dtype=np.float64),
                                   np.asarray(reference, dtype=np.float64),
                                   rtol=1e-12, atol=0.0)
        t_numba = _time(fn_numba, repeats)
        row["numba_ms"] = t_numba * 1e3
        row["speedup"] = t_numpy / t_numba if t_numba > 0 else float("inf")
    return row


def _boxes(rng: np.random.Generator, n: int) -> np.ndarray:
    w = rng.uniform(0.05, 0.4, size=n)
    h = rng.uniform(0.05, 0.4, size=n)
    x = rng.uniform(w / 2, 1.0 - w / 2)
    y = rng.uniform(h / 2, 1.0 - h / 2)
    return np.stack([x, y, w, h], axis=1)


def run_benchmarks(repeats: int, quick: bool) -> list[dict]:
    rng = np.random.default_rng(0)
    rows: list[dict] = []

    point_counts = [10_000, 100_000] if quick else [10_000, 100_000, 1_000_000]
    union_boxes = _boxes(rng, 8)
    for n in point_counts:
        px = rng.uniform(0.0, 1.0, size=n)
        py = rng.uniform(0.0, 1.0, size=n)
        rows.append(_row(
            "count_points_in_union", f"{n} pts x 8 boxes",
            lambda px=px, py=py: count_points_in_union(
                px, py, union_boxes, backend="numpy"),
            lambda px=px, py=py: count_points_in_union(
                px, py, union_boxes, backend="numba"),
            repeats))

    heatmap_sizes = [(1_000, 64)] if quick else [(1_000, 64), (10_000, 64),
                                                 (10_000, 256)]
    for n_boxes, resolution in heatmap_sizes:
        boxes = _boxes(rng, n_boxes)
        rows.append(_row(
            "heatmap_accumulate", f"{n_boxes} boxes @ {resolution}^2",
            lambda b=boxes, r=resolution: heatmap_accumulate(
                b, r, backend="numpy"),
            lambda b=boxes, r=resolution: heatmap_accumulate(
                b, r, backend="numba"),
            repeats))

    m = 5
    weights = rng.dirichlet(np.ones(m))
    mean_x, mean_y = rng.uniform(0.2, 0.8, m), rng.uniform(0.2, 0.8, m)
    std_x, std_y = rng.uniform(0.05, 0.2, m), rng.uniform(0.05, 0.2, m)
    corr = rng.uniform(-0.5, 0.5, m)
    grid_sizes = [128] if quick else [128, 256, 512]
    for side in grid_sizes:
        xs = np.linspace(0.0, 1.0, side)
        ys = np.linspace(0.0, 1.0, side)
        rows.append(_row(
            "mixture_density_grid", f"{side}x{side}, M={m}",
            lambda x=xs, y=ys: mixture_density_grid(
                x, y, weights, mean_x, mean_y, std_x, std_y, corr,
                backend="numpy"),
            lambda x=xs, y=ys: mixture_density_grid(
                x, y, weights, mean_x, mean_y, std_x, std_y, corr,
                backend="numba"),
            repeats))
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions per case (best is kept)")
    parser.add_argument("--quick", action="store_true",
                        help="small sizes only")
    args = parser.parse_args()

    if not HAVE_NUMBA:
        print("numba is not importable; timing the numpy route only\n")

    rows = run_benchmarks(args.repeats, args.quick)

    header = (f"{'kernel':<24} {'size':<22} {'numpy (ms)':>12} "
              f"{'numba (ms)':>12} {'speedup':>9}")
    print(header)
    print("-" * len(header))
    for row in rows:
        numba_ms = ("-" if row["numba_ms"] is None
                    else f"{row['numba_ms']:.3f}")
        speedup = ("-" if row["speedup"] is None
                   else f"{row['speedup']:.1f}x")
        print(f"{row['kernel']:<24} {row['size']:<22} "
              f"{row['numpy_ms']:>12.3f} {numba_ms:>12} {speedup:>9}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
