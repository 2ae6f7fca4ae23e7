import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseless_scattering.conditions import Dirichlet, Impedance, Neumann, Transmission
from phaseless_scattering.forward import (
    FarFieldPattern,
    NystromSolver,
    SolverSingularError,
    farfield_grid,
    solve,
    solve_exterior,
    solve_transmission,
)
from phaseless_scattering.geometry import benchmark
from phaseless_scattering.incident import PlaneWaveSuperposition
from phaseless_scattering.oracle import series_farfield
from phaseless_scattering.phaseless import translation_phase

CONDITIONS = [Dirichlet(), Neumann(), Impedance(2.0), Transmission(0.64, 1.2)]
IDS = ["dirichlet", "neumann", "impedance", "transmission"]


@pytest.mark.parametrize("bc", CONDITIONS, ids=IDS)
@pytest.mark.parametrize("k", [1.0, 5.0])
def test_circle_matches_series(bc, k):
    curve = benchmark("circle", r0=0.8, center=(0.3, -0.2))
    w = PlaneWaveSuperposition.from_angles(k, [20, 110], degrees=True)
    num = NystromSolver(curve, bc, k, 64).solve(w).samples
    ref = series_farfield(0.8, (0.3, -0.2), bc, k, w.directions).samples
    assert np.abs(num - ref).max() < 1e-10


def test_absorbing_transmission_matches_series():
    bc = Transmission(0.8 + 0.3j, 0.7)
    w = PlaneWaveSuperposition.from_angles(3.0, [0], degrees=True)
    num = NystromSolver(benchmark("circle"), bc, 3.0, 64).solve(w).samples
    ref = series_farfield(1.0, (0, 0), bc, 3.0, w.directions).samples
    assert np.abs(num - ref).max() < 1e-10


@pytest.mark.parametrize("bc", CONDITIONS, ids=IDS)
def test_reciprocity(bc):
    # u_inf(xhat; d) = u_inf(-d; -xhat), checked on grid directions
    k, n_f = 3.0, 32
    solver = NystromSolver(benchmark("kite"), bc, k, 64)
    th = farfield_grid(n_f)
    table = np.array([solver.solve(PlaneWaveSuperposition.from_angles(k, [a]), n_f).samples for a in th])
    # table[i, j] = u_inf(xhat_j; d_i); -xhat_j is grid index j + n_f/2
    flip = (np.arange(n_f) + n_f // 2) % n_f
    assert np.abs(table - table[np.ix_(flip, flip)].T).max() < 1e-9


@pytest.mark.parametrize("bc", CONDITIONS, ids=IDS)
def test_superposition_linearity(bc):
    k = 2.0
    solver = NystromSolver(benchmark("apple"), bc, k, 64)
    w = PlaneWaveSuperposition.from_angles(k, [0, 120], degrees=True)
    both = solver.solve(w).samples
    parts = solver.solve(w.single(0)).samples + solver.solve(w.single(1)).samples
    assert np.abs(both - parts).max() < 1e-12


@given(st.floats(-1, 1), st.floats(-1, 1), st.sampled_from(CONDITIONS))
@settings(max_examples=8)
def test_translation_relation(lx, ly, bc):
    k = 1.5
    w = PlaneWaveSuperposition.from_angles(k, [30], degrees=True)
    curve = benchmark("rounded_triangle") if isinstance(bc, Transmission) else benchmark("apple")
    base = NystromSolver(curve, bc, k, 64).solve(w).samples
    moved = NystromSolver(curve.translated((lx, ly)), bc, k, 64).solve(w).samples
    phase = translation_phase(k, w.directions[0], (lx, ly), 128)
    assert np.abs(moved - phase * base).max() < 1e-10


@pytest.mark.parametrize("k", [1.0, 5.0])
def test_optical_theorem(k):
    # lossless obstacles: ||u_inf||^2 = sqrt(8 pi / k) Im(exp(-i pi/4) u_inf(d))
    w = PlaneWaveSuperposition.from_angles(k, [0])
    for bc in (Dirichlet(), Neumann(), Transmission(0.64, 1.2)):
        f = NystromSolver(benchmark("kite"), bc, k, 64).solve(w, 256).samples
        norm2 = 2 * np.pi / 256 * np.sum(np.abs(f) ** 2)
        assert norm2 == pytest.approx(np.sqrt(8 * np.pi / k) * np.imag(np.exp(-0.25j * np.pi) * f[0]), rel=1e-10)


@pytest.mark.parametrize("name, bc", [("kite", Neumann()), ("rounded_triangle", Transmission(0.64, 1.2))])
def test_node_refinement_converges(name, bc):
    w = PlaneWaveSuperposition.from_angles(7.0, [0, 90], degrees=True)
    a = NystromSolver(benchmark(name), bc, 7.0, 64).solve(w).samples
    b = NystromSolver(benchmark(name), bc, 7.0, 128).solve(w).samples
    assert np.abs(a - b).max() < 1e-8


def test_adaptive_and_dispatch():
    w = PlaneWaveSuperposition.from_angles(3.0, [0])
    f = solve(benchmark("apple"), Dirichlet(), w)
    g = NystromSolver(benchmark("apple"), Dirichlet(), 3.0, 256).solve(w)
    assert np.abs(f.samples - g.samples).max() < 1e-8
    assert solve(benchmark("circle"), Transmission(2.0, 1.0), w, n_q=64).bc == "transmission"
    with pytest.raises(TypeError):
        solve_exterior(benchmark("circle"), Transmission(2.0, 1.0), w)
    with pytest.raises(TypeError):
        solve_transmission(benchmark("circle"), Dirichlet(), w)


def test_singular_system_detected():
    # pure double-layer ansatz fails at an interior Neumann eigenvalue of the unit disk
    with pytest.raises(SolverSingularError):
        NystromSolver(benchmark("circle"), Dirichlet(), 3.8317059702075125, 64, eta=0.0)
    NystromSolver(benchmark("circle"), Dirichlet(), 3.8317059702075125, 64)


def test_total_traces_satisfy_boundary_condition():
    k = 2.0
    w = PlaneWaveSuperposition.from_angles(k, [0, 90], degrees=True)
    tr = NystromSolver(benchmark("kite"), Dirichlet(), k, 64).total_traces(w)
    assert np.abs(tr.u).max() < 1e-12
    tr = NystromSolver(benchmark("kite"), Neumann(), k, 64).total_traces(w)
    assert np.abs(tr.dudn).max() < 1e-10
    tr = NystromSolver(benchmark("kite"), Impedance(1.5), k, 64).total_traces(w)
    assert np.abs(tr.dudn + 1.5 * tr.u).max() < 1e-10
    tr = NystromSolver(benchmark("kite"), Transmission(0.64, 1.2), k, 64).total_traces(w)
    assert np.abs(tr.u - tr.u_int).max() < 1e-10
    assert np.abs(tr.dudn - 1.2 * tr.dudn_int).max() < 1e-9


def test_farfield_pattern_file_round_trip(tmp_path):
    w = PlaneWaveSuperposition.from_angles(2.0, [0, 90], degrees=True)
    f = NystromSolver(benchmark("apple"), Impedance(1.0), 2.0, 64).solve(w, 64)
    f.write(tmp_path / "ff.csv")
    g = FarFieldPattern.read(tmp_path / "ff.csv")
    assert np.array_equal(g.samples, f.samples)
    assert (g.k, g.bc, g.incidence) == (f.k, f.bc, f.incidence)
    assert np.allclose((f - g).samples, 0) and np.allclose((f + g).samples, 2 * f.samples)


def test_grid_validation():
    with pytest.raises(ValueError):
        farfield_grid(1)
    assert np.allclose(farfield_grid(4), [0, np.pi / 2, np.pi, 3 * np.pi / 2])
