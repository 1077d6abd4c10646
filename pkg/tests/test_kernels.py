"""Dual-backend kernel tests: numpy reference vs numba twin, plus oracles."""

import numpy as np
import pytest

from scenesketch import kernels
from scenesketch.kernels import (
    count_points_in_union,
    heatmap_accumulate,
    kernel_backend,
    mixture_density_grid,
)

BACKENDS = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])


def test_backend_resolution(monkeypatch):
    assert kernel_backend("numpy") == "numpy"
    monkeypatch.setenv("SCENESKETCH_KERNELS", "numpy")
    assert kernel_backend() == "numpy"
    monkeypatch.setenv("SCENESKETCH_KERNELS", "bogus")
    with pytest.raises(ValueError):
        kernel_backend()
    monkeypatch.delenv("SCENESKETCH_KERNELS")
    assert kernel_backend() in ("numpy", "numba")


@pytest.mark.parametrize("backend", BACKENDS)
def test_points_in_union_oracle(backend):
    # One box covering left half: points at x<0.25 inside, x>0.75 outside.
    boxes = np.array([[0.25, 0.5, 0.5, 1.0]])
    px = np.array([0.1, 0.2, 0.8, 0.9, 0.5])  # 0.5 on right edge -> inclusive
    py = np.full(5, 0.5)
    assert count_points_in_union(px, py, boxes, backend=backend) == 3


@pytest.mark.parametrize("backend", BACKENDS)
def test_points_in_union_union_semantics(backend):
    # Overlapping boxes: a point inside both counts once.
    boxes = np.array([[0.5, 0.5, 0.4, 0.4], [0.5, 0.5, 0.6, 0.6]])
    px = np.array([0.5])
    py = np.array([0.5])
    assert count_points_in_union(px, py, boxes, backend=backend) == 1


def test_points_in_union_backends_agree():
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(2)
    boxes = np.column_stack([
        rng.uniform(0.2, 0.8, 50), rng.uniform(0.2, 0.8, 50),
        rng.uniform(0.05, 0.4, 50), rng.uniform(0.05, 0.4, 50),
    ])
    px = rng.uniform(0, 1, 2000)
    py = rng.uniform(0, 1, 2000)
    a = count_points_in_union(px, py, boxes, backend="numpy")
    b = count_points_in_union(px, py, boxes, backend="numba")
    assert a == b


@pytest.mark.parametrize("backend", BACKENDS)
def test_heatmap_plateaus(backend):
    res = 16
    boxes = np.array([
        [0.25, 0.25, 0.5, 0.5],
        [0.30, 0.30, 0.5, 0.5],
    ])
    grid = heatmap_accumulate(boxes, res, backend=backend)
    assert grid.min() >= 0
    assert grid.max() == 2.0  # overlap region counted twice
    # Full-canvas box -> uniform ones.
    full = heatmap_accumulate(np.array([[0.5, 0.5, 1.0, 1.0]]), res, backend=backend)
    np.testing.assert_array_equal(full, np.ones((res, res)))


@pytest.mark.parametrize("backend", BACKENDS)
def test_heatmap_mass_matches_area(backend):
    res = 64
    rng = np.random.default_rng(4)
    boxes = np.column_stack([
        rng.uniform(0.3, 0.7, 20), rng.uniform(0.3, 0.7, 20),
        rng.uniform(0.1, 0.5, 20), rng.uniform(0.1, 0.5, 20),
    ])
    grid = heatmap_accumulate(boxes, res, backend=backend)
    mass = grid.sum()
    expected = sum(b[2] * b[3] * res * res for b in boxes)
    # Cell-center counting is exact up to boundary cells (~perimeter * res).
    slack = sum(2 * (b[2] + b[3]) * res + 4 for b in boxes)
    assert abs(mass - expected) <= slack


def test_heatmap_backends_agree_exactly():
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(5)
    boxes = np.column_stack([
        rng.uniform(0, 1, 30), rng.uniform(0, 1, 30),
        rng.uniform(0.05, 0.9, 30), rng.uniform(0.05, 0.9, 30),
    ])
    a = heatmap_accumulate(boxes, 48, backend="numpy")
    b = heatmap_accumulate(boxes, 48, backend="numba")
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("backend", BACKENDS)
def test_mixture_density_single_gaussian_peak(backend):
    # Standard bivariate normal at the origin: density 1/(2*pi).
    val = mixture_density_grid(
        np.array([0.0]), np.array([0.0]),
        weights=np.array([1.0]), mean_x=np.array([0.0]), mean_y=np.array([0.0]),
        std_x=np.array([1.0]), std_y=np.array([1.0]), corr=np.array([0.0]),
        backend=backend,
    )
    assert val[0, 0] == pytest.approx(1.0 / (2.0 * np.pi), rel=1e-12)


def test_mixture_density_backends_agree():
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(6)
    m = 5
    args = dict(
        weights=rng.dirichlet(np.ones(m)),
        mean_x=rng.normal(size=m), mean_y=rng.normal(size=m),
        std_x=rng.uniform(0.2, 1.5, m), std_y=rng.uniform(0.2, 1.5, m),
        corr=rng.uniform(-0.8, 0.8, m),
    )
    xs = np.linspace(-4, 4, 41)
    ys = np.linspace(-4, 4, 37)
    a = mixture_density_grid(xs, ys, backend="numpy", **args)
    b = mixture_density_grid(xs, ys, backend="numba", **args)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)


def test_mixture_density_grid_integrates_to_one():
    # Mixture mass over a wide grid approximates 1 (trapezoid integration).
    rng = np.random.default_rng(7)
    m = 5
    weights = rng.dirichlet(np.ones(m))
    mean_x = rng.uniform(-0.5, 0.5, m)
    mean_y = rng.uniform(-0.5, 0.5, m)
    std_x = rng.uniform(0.3, 1.0, m)
    std_y = rng.uniform(0.3, 1.0, m)
    corr = rng.uniform(-0.6, 0.6, m)
    span = 6.0 * max(std_x.max(), std_y.max())
    xs = np.linspace(mean_x.min() - span, mean_x.max() + span, 201)
    ys = np.linspace(mean_y.min() - span, mean_y.max() + span, 201)
    grid = mixture_density_grid(xs, ys, weights, mean_x, mean_y, std_x, std_y, corr)
    total = np.trapezoid(np.trapezoid(grid, xs, axis=1), ys)
    assert total == pytest.approx(1.0, abs=0.02)


def test_mixture_density_validates_parameters():
    one = np.array([1.0])
    with pytest.raises(ValueError):
        mixture_density_grid(one, one, one, one, one, np.array([-1.0]), one,
                             np.array([0.0]))
    with pytest.raises(ValueError):
        mixture_density_grid(one, one, one, one, one, one, one, np.array([1.0]))
