import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import quad

from phaseless_scattering.geometry import (
    BENCHMARKS,
    Circle,
    KiteShaped,
    PerturbedCurve,
    StarlikeCurve,
    TrigPolynomial,
    benchmark,
    hs_norm_squared,
    hs_weights,
    read_curve_json,
    read_polyline_csv,
    write_curve_json,
    write_polyline_csv,
)

coeffs = st.integers(min_value=0, max_value=6).flatmap(
    lambda M: arrays(float, 2 * M + 1, elements=st.floats(-1, 1))
)
T = np.linspace(0, 2 * np.pi, 37)


def _fd(f, t, h=1e-5):
    return (f(t + h) - f(t - h)) / (2 * h)


@given(coeffs)
def test_trig_derivatives_match_finite_differences(alpha):
    p = TrigPolynomial(alpha)
    assert np.allclose(p(T, 1), _fd(p, T), atol=1e-7)
    assert np.allclose(p(T, 2), _fd(lambda t: p(t, 1), T), atol=1e-6)
    assert np.allclose(p(T, 3), _fd(lambda t: p(t, 2), T), atol=1e-5)


@given(coeffs, st.integers(min_value=0, max_value=4))
def test_padding_preserves_values(alpha, extra):
    p = TrigPolynomial(alpha)
    q = p.padded(p.order + extra)
    assert q.order == p.order + extra
    assert np.allclose(p(T), q(T), atol=1e-14)


def test_padding_down_and_even_length_rejected():
    with pytest.raises(ValueError):
        TrigPolynomial(np.zeros(4))
    with pytest.raises(ValueError):
        TrigPolynomial(np.zeros(5)).padded(1)


@given(coeffs)
def test_hs_norm_s0_is_l2_norm(alpha):
    p = TrigPolynomial(alpha)
    ref = quad(lambda t: p(t) ** 2, 0, 2 * np.pi, limit=200)[0]
    assert hs_norm_squared(p, 0.0) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@given(coeffs)
def test_hs_norm_s1_is_h1_norm(alpha):
    p = TrigPolynomial(alpha)
    ref = quad(lambda t: p(t) ** 2 + p(t, 1) ** 2, 0, 2 * np.pi, limit=200)[0]
    assert hs_norm_squared(p, 1.0) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_hs_weights_layout():
    w = hs_weights(3, 1.6)
    assert w[0] == pytest.approx(2 * np.pi)
    assert np.allclose(w[1:4], w[4:])
    assert w[3] == pytest.approx(np.pi * 10**1.6)
    with pytest.raises(ValueError):
        hs_weights(3, -0.1)


@pytest.mark.parametrize("name", sorted(BENCHMARKS) + ["circle"])
def test_jet_consistency(name):
    c = benchmark(name)
    x, dx, ddx = c.derivatives(T)
    assert np.allclose(dx, _fd(c.point, T)[...], atol=1e-7)
    assert np.allclose(ddx, _fd(lambda t: c.derivatives(t)[1], T), atol=1e-6)
    jet = c.jet(T)
    assert np.allclose(np.linalg.norm(jet.normal, axis=-1), 1)
    assert np.allclose((jet.normal * dx).sum(-1), 0, atol=1e-14)


@pytest.mark.parametrize("name", sorted(BENCHMARKS))
def test_counter_clockwise_with_outward_normal(name):
    c = benchmark(name)
    t = 2 * np.pi * np.arange(1024) / 1024
    jet = c.jet(t)
    # signed area by Green's theorem is positive for positive orientation
    area = 0.5 * np.mean(jet.point[:, 0] * jet.d1[:, 1] - jet.point[:, 1] * jet.d1[:, 0]) * 2 * np.pi
    assert area > 0
    # divergence theorem: integral of nu . x ds = 2 |D|
    flux = np.mean((jet.normal * jet.point).sum(-1) * jet.speed) * 2 * np.pi
    assert flux == pytest.approx(2 * area, rel=1e-10)


def test_benchmark_formulas():
    t = np.array([0.0, np.pi / 2, np.pi])
    apple = benchmark("apple").point(t)
    r = (0.5 + 0.4 * np.cos(t) + 0.1 * np.sin(2 * t)) / (1 + 0.7 * np.cos(t))
    assert np.allclose(apple, r[:, None] * np.column_stack([np.cos(t), np.sin(t)]))
    kite = KiteShaped().point(t)
    assert np.allclose(kite, [[1.0, 0.0], [-1.3, 1.5], [-1.0, 0.0]])
    tri = benchmark("rounded_triangle").point(t)
    assert np.allclose(np.linalg.norm(tri, axis=1), 2 + 0.3 * np.cos(3 * t))
    with pytest.raises(ValueError):
        benchmark("banana")


def test_circle_and_starlike_circle_agree():
    a = Circle(0.7, (1.0, -2.0))
    b = StarlikeCurve.circle(0.7, (1.0, -2.0), order=3)
    assert np.allclose(a.point(T), b.point(T))
    with pytest.raises(ValueError):
        Circle(0.0)


@given(arrays(float, 2, elements=st.floats(-5, 5)), coeffs)
def test_starlike_vector_round_trip_and_translation(shift, alpha):
    alpha = alpha.copy()
    alpha[0] += 3.0
    c = StarlikeCurve((0.1, 0.2), TrigPolynomial(alpha))
    assert np.array_equal(StarlikeCurve.from_vector(c.to_vector()).to_vector(), c.to_vector())
    moved = c.translated(shift)
    assert np.allclose(moved.point(T), c.point(T) + shift)
    assert np.allclose(moved.jet(T).normal, c.jet(T).normal)
    generic = super(StarlikeCurve, c).translated(shift)
    assert np.allclose(generic.point(T), moved.point(T))


def test_degenerate_curve_rejected():
    c = StarlikeCurve.circle(0.0)
    with pytest.raises(ValueError):
        c.jet(T)


def test_perturbed_curve():
    class Shift:
        def derivatives(self, t):
            t = np.asarray(t)
            z = np.zeros(t.shape + (2,))
            return z + [1.0, 0.0], z, z

    c = PerturbedCurve(benchmark("apple"), Shift(), 0.25)
    assert np.allclose(c.point(T), benchmark("apple").point(T) + [0.25, 0])


def test_file_round_trips(tmp_path):
    c = StarlikeCurve((0.3, -0.1), TrigPolynomial([1.0, 0.1, -0.2, 0.05, 1 / 3]))
    write_curve_json(c, tmp_path / "c.json")
    back = read_curve_json(tmp_path / "c.json")
    assert np.array_equal(back.to_vector(), c.to_vector())
    write_polyline_csv(benchmark("kite"), tmp_path / "k.csv", n=64)
    poly = read_polyline_csv(tmp_path / "k.csv")
    assert np.array_equal(poly, benchmark("kite").polyline(64))
