import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fd_helpers import analytic_derivative, fd_errors, observed_orders
from phaseless_scattering.conditions import Dirichlet, Impedance, Neumann, Transmission
from phaseless_scattering.forward import NystromSolver
from phaseless_scattering.frechet import (
    BoundaryPerturbation,
    derivative_farfield_dirichlet,
    derivative_farfield_neumann,
    derivative_farfield_transmission,
    derivative_farfield_samples,
    linearize,
    phaseless_jacobian,
    starlike_basis,
)
from phaseless_scattering.geometry import StarlikeCurve, TrigPolynomial, benchmark
from phaseless_scattering.incident import PlaneWaveSuperposition
from phaseless_scattering.inversion import IterateState

EPS = [4e-3, 2e-3, 1e-3]
H_RADIAL = BoundaryPerturbation(dr=TrigPolynomial([0, 0, 1, 0, 0]))
H_MIXED = BoundaryPerturbation(0.3, -0.2, TrigPolynomial([0.2, 0.5, 0, 0, 0.4]))
W = PlaneWaveSuperposition.from_angles(3.0, [0, 90], degrees=True)

CASES = [
    ("apple", Dirichlet(), 0.0),
    ("kite", Neumann(), 0.0),
    ("rounded_triangle", Transmission(0.64, 1.2), 0.0),
    ("rounded_triangle", Transmission(0.64, 1.2), 0.5),
    ("apple", Transmission(0.8 + 0.2j, 0.7), 0.3),
]


@pytest.mark.parametrize("name, bc, dlam", CASES)
@pytest.mark.parametrize("h", [H_RADIAL, H_MIXED], ids=["radial", "mixed"])
def test_matches_central_differences(name, bc, dlam, h):
    errs = fd_errors(benchmark(name), bc, 3.0, W, h, EPS, dlam=dlam)
    assert errs[-1] < 1e-4
    assert observed_orders(EPS, errs).min() >= 1.8


def test_wrappers_agree_with_samples():
    curve, k = benchmark("apple"), 3.0
    for fn, bc in [(derivative_farfield_dirichlet, Dirichlet()), (derivative_farfield_neumann, Neumann())]:
        f = fn(curve, k, W, H_MIXED)
        assert np.allclose(f.samples, analytic_derivative(curve, bc, k, W, H_MIXED))
        assert f.bc == bc.name
    f = derivative_farfield_transmission(curve, 0.64, 1.2, k, W, H_MIXED, dlam=0.4)
    ref = analytic_derivative(curve, Transmission(0.64, 1.2), k, W, H_MIXED, dlam=0.4)
    assert np.allclose(f.samples, ref)


@given(arrays(float, 7, elements=st.floats(-1, 1)), arrays(float, 7, elements=st.floats(-1, 1)), st.floats(-3, 3))
@settings(max_examples=10)
def test_linear_in_displacement(a, b, s):
    solver = NystromSolver(benchmark("kite"), Neumann(), 2.0, 64)
    w = W.with_k(2.0)
    traces = solver.total_traces(w)

    def d(coef):
        h = BoundaryPerturbation(coef[0], coef[1], TrigPolynomial(coef[2:]))
        return derivative_farfield_samples(solver, w, h.derivatives(solver.t)[0], traces=traces)[:, 0]

    lhs = d(a + s * b)
    rhs = d(a) + s * d(b)
    assert np.abs(lhs - rhs).max() <= 1e-11 * (1 + np.abs(rhs).max())


def test_impedance_not_supported():
    solver = NystromSolver(benchmark("kite"), Impedance(1.0), 2.0, 64)
    with pytest.raises(NotImplementedError):
        derivative_farfield_samples(solver, W.with_k(2.0), H_RADIAL.derivatives(solver.t)[0])


def test_basis_is_parameter_derivative():
    rng = np.random.default_rng(0)
    p = np.concatenate([[0.2, -0.1, 1.0], 0.1 * rng.normal(size=6)])
    curve = StarlikeCurve.from_vector(p)
    t = np.linspace(0, 2 * np.pi, 11)
    B = starlike_basis(t, curve.order)
    for j in range(p.size):
        e = np.zeros(p.size)
        e[j] = 1e-6
        fd = (StarlikeCurve.from_vector(p + e).point(t) - StarlikeCurve.from_vector(p - e).point(t)) / 2e-6
        assert np.allclose(B[:, :, j], fd, atol=1e-8)


@pytest.mark.parametrize("bc", [Dirichlet(), Transmission(0.64, 1.2)])
def test_jacobian_columns_match_intensity_differences(bc):
    rng = np.random.default_rng(1)
    p = np.concatenate([[0.1, 0.2, 1.0], 0.05 * rng.normal(size=4)])
    transmission = isinstance(bc, Transmission)
    k = 2.0
    incid = [W.with_k(k), PlaneWaveSuperposition.from_angles(k, [90, 180], degrees=True)]
    F, J = linearize(StarlikeCurve.from_vector(p), bc, k, incid, n_f=64)
    assert F.shape == (2, 64) and J.shape == (2, 64, p.size + transmission)
    full = np.append(p, bc.lam) if transmission else p

    def intensities(q):
        b = Transmission(bc.n, q[-1]) if transmission else bc
        curve = StarlikeCurve.from_vector(q[:-1] if transmission else q)
        return linearize(curve, b, k, incid, n_f=64)[0]

    direction = rng.normal(size=full.size)
    e = 1e-4
    fd = (intensities(full + e * direction) - intensities(full - e * direction)) / (2 * e)
    assert np.abs(fd - J @ direction).max() < 1e-6 * np.abs(fd).max()
    stacked = phaseless_jacobian(IterateState(StarlikeCurve.from_vector(p), bc.lam if transmission else None), bc, k, incid, n_f=64)
    assert np.array_equal(stacked, J.reshape(-1, J.shape[2]))


@pytest.mark.parametrize("bc", [Dirichlet(), Neumann(), Transmission(0.64, 1.2)])
def test_translation_nullspace_for_single_wave(bc):
    curve = StarlikeCurve.from_vector(np.array([0.1, -0.3, 1.0, 0.2, 0.0, 0.0, 0.1]))
    _, J = linearize(curve, bc, 3.0, [PlaneWaveSuperposition.from_angles(3.0, [0])])
    J = J.reshape(-1, J.shape[2])
    ratio = np.linalg.norm(J[:, :2]) / np.linalg.norm(J)
    assert ratio < 1e-7
