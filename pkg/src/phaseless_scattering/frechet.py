"""Domain derivatives of the far field and the phaseless Jacobian.

For a boundary displacement ``h`` the derivative ``u'`` is radiating and
solves the same scattering problem with boundary data

* Dirichlet: ``-h_nu du/dnu``
* Neumann: ``k^2 h_nu u + Div_G[h_nu (grad u)_t]``
* transmission: ``f1 = -h_nu (du+/dnu - du-/dnu)``,
  ``f2 = (k^2 - lam k^2 n) h_nu u + Div_G[h_nu ((grad u+)_t - lam (grad u-)_t)]
  + (dlam/lam) du+/dnu``

In 2D, ``Div_G[g t] = (1/|x'|) dg/dt`` for the unit tangent ``t``. The
phaseless derivative is ``2 Re[conj(u_inf) u'_inf]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quadrature
from .conditions import Dirichlet, Impedance, Neumann, Transmission
from .forward import DEFAULT_NQ, BoundaryTraces, FarFieldPattern, NystromSolver
from .geometry import Curve, StarlikeCurve, TrigPolynomial, _unit_columns
from .incident import PlaneWaveSuperposition


@dataclass(frozen=True, eq=False)
class BoundaryPerturbation:
    """``h(t) = (da1, da2) + dr(t) (cos t, sin t)`` plus ``dlam`` for transmission."""

    da1: float = 0.0
    da2: float = 0.0
    dr: TrigPolynomial = TrigPolynomial(np.zeros(1))
    dlam: float = 0.0

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        e, e_perp = _unit_columns(t)
        r, dr, ddr = self.dr(t), self.dr(t, 1), self.dr(t, 2)
        h = np.array([self.da1, self.da2]) + r[..., None] * e
        dh = dr[..., None] * e + r[..., None] * e_perp
        ddh = (ddr - r)[..., None] * e + 2 * dr[..., None] * e_perp
        return h, dh, ddh

    def coefficients(self, order: int, transmission: bool = False) -> np.ndarray:
        """Coordinates in the Jacobian column basis."""
        p = np.concatenate([[self.da1, self.da2], self.dr.padded(order).alpha])
        return np.append(p, self.dlam) if transmission else p


def _boundary_data(solver: NystromSolver, traces: BoundaryTraces, h_nu: np.ndarray, dlam=None):
    """Boundary data of ``u'`` for normal displacements ``h_nu`` (shape (2n, P))."""
    bc = solver.bc
    speed = solver.ops.speed[:, None]
    if isinstance(bc, Dirichlet):
        return -h_nu * traces.dudn[:, None]
    if isinstance(bc, Neumann):
        k2 = solver.k**2
        flux = h_nu * traces.dudt[:, None]
        return k2 * h_nu * traces.u[:, None] + quadrature.differentiate(flux) / speed
    if isinstance(bc, Transmission):
        lam, k2 = bc.lam, solver.k**2
        f1 = -h_nu * (traces.dudn - traces.dudn_int)[:, None]
        flux = h_nu * ((1 - lam) * traces.dudt)[:, None]
        f2 = (k2 - lam * k2 * bc.n) * h_nu * traces.u[:, None] + quadrature.differentiate(flux) / speed
        if dlam is not None:
            f2 = f2 + np.outer(traces.dudn, dlam) / lam
        return f1, f2
    if isinstance(bc, Impedance):
        raise NotImplementedError("domain derivative for the impedance condition is not available")
    raise TypeError(f"unsupported boundary condition {bc!r}")


def _normal_component(solver: NystromSolver, h: np.ndarray) -> np.ndarray:
    """``h . nu`` for displacement samples of shape (2n, 2) or (2n, 2, P)."""
    nu = solver.ops.unit_normal
    if h.ndim == 2:
        return (h * nu).sum(-1)[:, None]
    return np.einsum("id,idp->ip", nu, h)


def derivative_farfield_samples(
    solver: NystromSolver,
    w: PlaneWaveSuperposition,
    h: np.ndarray,
    dlam=None,
    n_f: int = 128,
    traces: BoundaryTraces | None = None,
) -> np.ndarray:
    """Far fields of ``u'`` for displacement samples ``h`` at the solver nodes.

    ``h`` has shape ``(2n, 2)`` or ``(2n, 2, P)``; returns ``(n_f, P)``.
    """
    if traces is None:
        traces = solver.total_traces(w)
    h_nu = _normal_component(solver, np.asarray(h, dtype=float))
    if dlam is not None:
        dlam = np.broadcast_to(np.asarray(dlam, dtype=float), (h_nu.shape[1],))
    data = _boundary_data(solver, traces, h_nu, dlam)
    return solver.far_field_from_data(data, n_f)


def _derivative(curve, bc, k, w, h, n_f, n_q, dlam=None) -> FarFieldPattern:
    solver = NystromSolver(curve, bc, k, n_q)
    samples = derivative_farfield_samples(solver, w, h.derivatives(solver.t)[0], dlam, n_f)[:, 0]
    return FarFieldPattern(samples, k, w.to_json(), bc.name)


def derivative_farfield_dirichlet(curve: Curve, k: float, w, h, n_f: int = 128, n_q: int = DEFAULT_NQ):
    """Far field of ``u'`` for a sound-soft obstacle and displacement ``h``."""
    return _derivative(curve, Dirichlet(), k, w, h, n_f, n_q)


def derivative_farfield_neumann(curve: Curve, k: float, w, h, n_f: int = 128, n_q: int = DEFAULT_NQ):
    """Far field of ``u'`` for a sound-hard obstacle and displacement ``h``."""
    return _derivative(curve, Neumann(), k, w, h, n_f, n_q)


def derivative_farfield_transmission(
    curve: Curve, n, lam: float, k: float, w, h, dlam: float = 0.0, n_f: int = 128, n_q: int = DEFAULT_NQ
):
    """Far field of ``u'`` for a penetrable obstacle, shape ``h`` and ``dlam``."""
    return _derivative(curve, Transmission(n, lam), k, w, h, n_f, n_q, dlam=dlam)


def starlike_basis(t: np.ndarray, order: int) -> np.ndarray:
    """Displacements of the unit parameter perturbations, shape (len(t), 2, 2M+3).

    Columns: ``a1``, ``a2``, then ``{1, cos l t, sin l t} (cos t, sin t)``.
    """
    e, _ = _unit_columns(t)
    l = np.arange(1, order + 1)
    modes = np.concatenate(
        [np.ones((t.size, 1)), np.cos(np.outer(t, l)), np.sin(np.outer(t, l))], axis=1
    )
    radial = e[:, :, None] * modes[:, None, :]
    shifts = np.zeros((t.size, 2, 2))
    shifts[:, 0, 0] = 1.0
    shifts[:, 1, 1] = 1.0
    return np.concatenate([shifts, radial], axis=2)


def linearize(
    curve: StarlikeCurve,
    bc,
    k: float,
    incidences: list[PlaneWaveSuperposition],
    n_f: int = 128,
    n_q: int = DEFAULT_NQ,
):
    """Phaseless data and Jacobian at ``curve`` for each incident field.

    Returns ``(F, J)`` with ``F`` of shape ``(n_d, n_f)`` and ``J`` of
    shape ``(n_d, n_f, P)``; ``P = 2M+3``, plus one trailing ``lam`` column
    for transmission. One factorization serves every pair and column.
    """
    solver = NystromSolver(curve, bc, k, n_q)
    basis = starlike_basis(solver.t, curve.order)
    transmission = isinstance(bc, Transmission)
    P = basis.shape[2]
    F = np.empty((len(incidences), n_f))
    J = np.empty((len(incidences), n_f, P + int(transmission)))
    for l, w in enumerate(incidences):
        data = solver.incident_data(w)
        density = solver.solve_density(data)
        u_inf = solver._far_field(data, density, n_f)
        traces = solver.traces_from_solution(w, data, density)
        F[l] = np.abs(u_inf) ** 2
        h_nu = _normal_component(solver, basis)
        if transmission:
            h_nu = np.concatenate([h_nu, np.zeros((h_nu.shape[0], 1))], axis=1)
            dlam = np.zeros(P + 1)
            dlam[-1] = 1.0
            d_data = _boundary_data(solver, traces, h_nu, dlam)
        else:
            d_data = _boundary_data(solver, traces, h_nu)
        du_inf = solver.far_field_from_data(d_data, n_f)
        J[l] = 2 * np.real(np.conj(u_inf)[:, None] * du_inf)
    return F, J


def phaseless_jacobian(state, bc, k: float, incidences, n_f: int = 128, n_q: int = DEFAULT_NQ) -> np.ndarray:
    """Stacked Jacobian of shape ``(n_d * n_f, P)`` at ``state``.

    ``state`` carries ``curve`` and, for transmission, ``lam``.
    """
    if isinstance(bc, Transmission):
        bc = Transmission(bc.n, state.lam)
    _, J = linearize(state.curve, bc, k, incidences, n_f, n_q)
    return J.reshape(-1, J.shape[2])
