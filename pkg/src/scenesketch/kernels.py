"""Hot geometry/density kernels with two interchangeable backends.

Each kernel ships as a pure-numpy implementation and a numba ``@njit``
twin.  The active backend is chosen by the ``SCENESKETCH_KERNELS``
environment variable: ``auto`` (default; numba when importable), ``numba``,
or ``numpy``.  Both routes are kept live and cross-checked in tests; the
numpy route is the reference, the jitted route is the accelerator.

Boxes everywhere are ``(N, 4)`` float64 arrays of ``(cx, cy, w, h)`` —
center-anchored on the unit canvas, y increasing downward.  Containment is
inclusive at edges in both backends so the routes agree bit-for-bit.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "HAVE_NUMBA",
    "kernel_backend",
    "count_points_in_union",
    "heatmap_accumulate",
    "mixture_density_grid",
]

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install-time dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def kernel_backend(override: str | None = None) -> str:
    """Resolve the backend name: explicit override > env var > auto."""
    choice = (override or os.environ.get("SCENESKETCH_KERNELS", "auto")).lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"unknown kernel backend {choice!r} "
                         f"(expected auto, numba, or numpy)")
    if choice == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    if choice == "auto":
        return "numba" if HAVE_NUMBA else "numpy"
    return choice


# ---------------------------------------------------------------------------
# Points inside a union of boxes
# ---------------------------------------------------------------------------

def _points_in_union_numpy(px: np.ndarray, py: np.ndarray, boxes: np.ndarray) -> int:
    if boxes.shape[0] == 0:
        return 0
    hw = boxes[:, 2] * 0.5
    hh = boxes[:, 3] * 0.5
    in_x = np.abs(px[:, None] - boxes[None, :, 0]) <= hw[None, :]
    in_y = np.abs(py[:, None] - boxes[None, :, 1]) <= hh[None, :]
    return int(np.count_nonzero(np.any(in_x & in_y, axis=1)))


@njit(cache=False)
def _points_in_union_numba(px, py, boxes):  # pragma: no cover - exercised via wrapper
    count = 0
    for i in range(px.shape[0]):
        x = px[i]
        y = py[i]
        for b in range(boxes.shape[0]):
            hw = boxes[b, 2] * 0.5
            hh = boxes[b, 3] * 0.5
            if abs(x - boxes[b, 0]) <= hw and abs(y - boxes[b, 1]) <= hh:
                count += 1
                break
    return count


def count_points_in_union(
    px: np.ndarray, py: np.ndarray, boxes: np.ndarray, backend: str | None = None
) -> int:
    """Number of points (px[i], py[i]) lying inside at least one box."""
    px = np.ascontiguousarray(np.asarray(px, dtype=np.float64))
    py = np.ascontiguousarray(np.asarray(py, dtype=np.float64))
    boxes = np.ascontiguousarray(np.asarray(boxes, dtype=np.float64).reshape(-1, 4))
    if px.shape != py.shape or px.ndim != 1:
        raise ValueError(f"point arrays must be equal-length 1-D, got {px.shape}, {py.shape}")
    if kernel_backend(backend) == "numba":
        return int(_points_in_union_numba(px, py, boxes))
    return _points_in_union_numpy(px, py, boxes)


# ---------------------------------------------------------------------------
# Heatmap accumulation over a cell grid
# ---------------------------------------------------------------------------

def _heatmap_numpy(boxes: np.ndarray, resolution: int) -> np.ndarray:
    grid = np.zeros((resolution, resolution), dtype=np.float64)
    centers = (np.arange(resolution, dtype=np.float64) + 0.5) / resolution
    for b in range(boxes.shape[0]):
        cx, cy, w, h = boxes[b]
        in_x = np.abs(centers - cx) <= w * 0.5
        in_y = np.abs(centers - cy) <= h * 0.5
        grid += np.outer(in_y, in_x)
    return grid


@njit(cache=False)
def _heatmap_numba(boxes, resolution):  # pragma: no cover - exercised via wrapper
    grid = np.zeros((resolution, resolution), dtype=np.float64)
    for b in range(boxes.shape[0]):
        cx = boxes[b, 0]
        cy = boxes[b, 1]
        hw = boxes[b, 2] * 0.5
        hh = boxes[b, 3] * 0.5
        for i in range(resolution):
            y = (i + 0.5) / resolution
            if abs(y - cy) <= hh:
                for j in range(resolution):
                    x = (j + 0.5) / resolution
                    if abs(x - cx) <= hw:
                        grid[i, j] += 1.0
    return grid


def heatmap_accumulate(
    boxes: np.ndarray, resolution: int, backend: str | None = None
) -> np.ndarray:
    """Count, per grid cell, how many boxes contain the cell's center.

    Row i is the horizontal band at y=(i+0.5)/resolution (y grows downward).
    """
    boxes = np.ascontiguousarray(np.asarray(boxes, dtype=np.float64).reshape(-1, 4))
    if resolution <= 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    if kernel_backend(backend) == "numba":
        return _heatmap_numba(boxes, resolution)
    return _heatmap_numpy(boxes, resolution)


# ---------------------------------------------------------------------------
# Bivariate Gaussian mixture density on a grid
# ---------------------------------------------------------------------------

def _mixture_grid_numpy(xs, ys, weights, mean_x, mean_y, std_x, std_y, corr):
    dx = (xs[None, :, None] - mean_x[None, None, :]) / std_x[None, None, :]
    dy = (ys[:, None, None] - mean_y[None, None, :]) / std_y[None, None, :]
    one_minus_r2 = 1.0 - corr * corr
    z = dx * dx + dy * dy - 2.0 * corr[None, None, :] * dx * dy
    norm = 2.0 * np.pi * std_x * std_y * np.sqrt(one_minus_r2)
    comp = np.exp(-z / (2.0 * one_minus_r2[None, None, :])) / norm[None, None, :]
    return np.sum(weights[None, None, :] * comp, axis=-1)


@njit(cache=False)
def _mixture_grid_numba(xs, ys, weights, mean_x, mean_y, std_x, std_y, corr):
    # pragma: no cover - exercised via wrapper
    out = np.zeros((ys.shape[0], xs.shape[0]), dtype=np.float64)
    for i in range(ys.shape[0]):
        for j in range(xs.shape[0]):
            acc = 0.0
            for m in range(weights.shape[0]):
                sx = std_x[m]
                sy = std_y[m]
                r = corr[m]
                one_minus_r2 = 1.0 - r * r
                dx = (xs[j] - mean_x[m]) / sx
                dy = (ys[i] - mean_y[m]) / sy
                z = dx * dx + dy * dy - 2.0 * r * dx * dy
                acc += weights[m] * math.exp(-z / (2.0 * one_minus_r2)) / (
                    2.0 * math.pi * sx * sy * math.sqrt(one_minus_r2)
                )
            out[i, j] = acc
    return out


def mixture_density_grid(
    xs: np.ndarray,
    ys: np.ndarray,
    weights: np.ndarray,
    mean_x: np.ndarray,
    mean_y: np.ndarray,
    std_x: np.ndarray,
    std_y: np.ndarray,
    corr: np.ndarray,
    backend: str | None = None,
) -> np.ndarray:
    """Evaluate a bivariate Gaussian mixture density at every (xs[j], ys[i]).

    Returns an array of shape (len(ys), len(xs)).
    """
    arrays = [np.ascontiguousarray(np.asarray(a, dtype=np.float64).reshape(-1))
              for a in (xs, ys, weights, mean_x, mean_y, std_x, std_y, corr)]
    xs, ys, weights, mean_x, mean_y, std_x, std_y, corr = arrays
    m = weights.shape[0]
    for name, arr in (("mean_x", mean_x), ("mean_y", mean_y), ("std_x", std_x),
                      ("std_y", std_y), ("corr", corr)):
        if arr.shape[0] != m:
            raise ValueError(f"{name} has {arr.shape[0]} components, expected {m}")
    if np.any(std_x <= 0) or np.any(std_y <= 0):
        raise ValueError("standard deviations must be positive")
    if np.any(np.abs(corr) >= 1):
        raise ValueError("correlations must lie strictly inside (-1, 1)")
    if kernel_backend(backend) == "numba":
        return _mixture_grid_numba(xs, ys, weights, mean_x, mean_y, std_x, std_y, corr)
    return _mixture_grid_numpy(xs, ys, weights, mean_x, mean_y, std_x, std_y, corr)
