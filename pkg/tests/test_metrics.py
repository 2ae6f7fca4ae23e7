import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseless_scattering.geometry import StarlikeCurve, TrigPolynomial, benchmark
from phaseless_scattering.metrics import (
    aligned_shape_error,
    area_centroid,
    center_error,
    hausdorff_distance,
    radial_relative_error,
    ray_radius,
    reference_point,
)


def test_centroid_of_circle_and_triangle():
    assert np.allclose(area_centroid(benchmark("circle", r0=0.5, center=(1, -2))), [1, -2])
    # (2 + 0.3 cos 3t) has threefold symmetry about the origin
    assert np.allclose(area_centroid(benchmark("rounded_triangle")), 0, atol=1e-12)


def test_kite_reference_point_is_centroid():
    kite = benchmark("kite")
    assert np.allclose(reference_point(kite), area_centroid(kite))
    assert np.allclose(reference_point(benchmark("apple")), 0)


@pytest.mark.parametrize("name", ["apple", "rounded_triangle"])
def test_ray_radius_recovers_radial_function(name):
    c = benchmark(name)
    th = 2 * np.pi * np.arange(256) / 256
    assert np.allclose(ray_radius(c, (0, 0), th), c.radial(th)[0], atol=1e-5)


def test_ray_that_misses_is_nan():
    r = ray_radius(benchmark("circle", r0=0.5, center=(3, 0)), (0, 0), np.array([np.pi]))
    assert np.isnan(r[0])


@given(st.floats(0.5, 2.0), st.floats(0.01, 0.3))
@settings(max_examples=10)
def test_scaled_circle_errors(r0, grow):
    a = benchmark("circle", r0=r0)
    b = benchmark("circle", r0=r0 * (1 + grow))
    assert radial_relative_error(b, a) == pytest.approx(grow, rel=1e-5)
    assert hausdorff_distance(a, b) == pytest.approx(r0 * grow, rel=1e-5)
    assert center_error(a, b) < 1e-12


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=10)
def test_shape_error_ignores_translation(x, y):
    apple = benchmark("apple")
    assert aligned_shape_error(apple.translated((x, y)), apple) < 1e-10
    assert center_error(apple.translated((x, y)), apple) == pytest.approx(np.hypot(x, y), abs=1e-10)


def test_identical_curves_have_zero_error():
    c = StarlikeCurve((0.2, 0.1), TrigPolynomial([1.0, 0.2, 0.0]))
    assert radial_relative_error(c, c) == 0
    assert hausdorff_distance(c, c) == 0
