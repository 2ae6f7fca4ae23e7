"""Nyström boundary integral solvers for the forward scattering problems.

Formulations (all second kind on the parametrized boundary):

* Dirichlet, Neumann, impedance: combined potential
  ``u^s = D psi - i eta S psi`` with ``eta = k``. The hypersingular operator
  is split by Maue's formula into a Fourier multiplier ``-|m|`` plus
  log-singular remainders.
* Transmission: unknowns are the interior traces ``v = u_-`` and
  ``w = du_-/dnu``; the exterior and interior Green identities are added
  so that the single layer and hypersingular parts cancel to leading order.

Layer operators are stored pre-multiplied by two (``2S``, ``2K``, ...).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy import special

from . import quadrature
from .conditions import BoundaryCondition, Dirichlet, Impedance, Neumann, Transmission
from .geometry import Curve
from .incident import PlaneWaveSuperposition, trace_data

logger = logging.getLogger(__name__)

DEFAULT_NQ = 64
MAX_NQ = 512
ADAPTIVE_TOL = 1e-8
RCOND_MIN = 1e-13


class SolverSingularError(RuntimeError):
    """The integral equation matrix is numerically singular."""


def farfield_grid(n_f: int) -> np.ndarray:
    """Observation angles ``2 pi (j-1) / n_f``, j = 1..n_f."""
    if n_f < 2:
        raise ValueError("need at least two far-field samples")
    return 2 * np.pi * np.arange(n_f) / n_f


def farfield_constant(k) -> complex:
    """Far-field factor of the fundamental solution, ``e^{i pi/4} / sqrt(8 pi k)``."""
    return np.exp(1j * np.pi / 4) / np.sqrt(8 * np.pi * k)


@dataclass(eq=False)
class FarFieldPattern:
    """Samples of ``u_inf`` on the uniform grid of the unit circle."""

    samples: np.ndarray
    k: float
    incidence: dict = field(default_factory=dict)
    bc: str = ""

    @property
    def n_f(self) -> int:
        return self.samples.shape[0]

    @property
    def theta(self) -> np.ndarray:
        return farfield_grid(self.n_f)

    @property
    def directions(self) -> np.ndarray:
        th = self.theta
        return np.column_stack([np.cos(th), np.sin(th)])

    def __add__(self, other: FarFieldPattern) -> FarFieldPattern:
        return FarFieldPattern(self.samples + other.samples, self.k, self.incidence, self.bc)

    def __sub__(self, other: FarFieldPattern) -> FarFieldPattern:
        return FarFieldPattern(self.samples - other.samples, self.k, self.incidence, self.bc)

    def dumps(self) -> str:
        """``# {json header}`` line followed by ``theta,re,im`` rows."""
        head = json.dumps({"k": float(self.k), "incidence": self.incidence, "bc": self.bc}, sort_keys=True)
        rows = [f"{float(t)!r},{float(z.real)!r},{float(z.imag)!r}" for t, z in zip(self.theta, self.samples)]
        return "\n".join([f"# {head}", "theta,re,im", *rows]) + "\n"

    @classmethod
    def loads(cls, text: str) -> FarFieldPattern:
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# "):
            raise ValueError("far-field file lacks its JSON header line")
        head = json.loads(lines[0][2:])
        vals = np.array([[float(v) for v in row.split(",")] for row in lines[2:] if row.strip()])
        return cls(vals[:, 1] + 1j * vals[:, 2], head["k"], head["incidence"], head["bc"])

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def read(cls, path) -> FarFieldPattern:
        with open(path) as fh:
            return cls.loads(fh.read())


class LayerOperators:
    """Nyström matrices of the Helmholtz layer operators on one curve.

    Each kernel ``K(t, tau)`` is split as
    ``K1 ln(4 sin^2((t-tau)/2)) + K2``; the log part uses the weights of
    :func:`quadrature.log_weights`, the smooth part the trapezoidal rule.
    """

    def __init__(self, curve: Curve, kappa: complex, n_q: int):
        self.n = n_q
        self.kappa = kappa
        self.t = quadrature.nodes(n_q)
        jet = curve.jet(self.t)
        self.x = jet.point
        self.dx = jet.d1
        self.ddx = jet.d2
        self.speed = jet.speed
        self.unit_normal = jet.normal
        # normal scaled by |x'|, the measure ds = |x'| dt already folded in
        self.nvec = jet.normal * jet.speed[:, None]

        diff = self.x[:, None, :] - self.x[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(r, 1.0)
        self.diff = diff
        self.r = r
        kr = kappa * r
        self.J0 = special.jv(0, kr)
        self.J1_over_r = special.jv(1, kr) / r
        self.H0 = special.hankel1(0, kr)
        self.H1_over_r = special.hankel1(1, kr) / r
        np.fill_diagonal(self.J0, 1.0)
        np.fill_diagonal(self.J1_over_r, kappa / 2)
        self.R = quadrature.log_weights(n_q)
        self.LOG = quadrature.log_kernel(n_q)
        self.curvature_term = (
            self.nvec[:, 0] * self.ddx[:, 0] + self.nvec[:, 1] * self.ddx[:, 1]
        ) / self.speed**2
        # smooth diagonal of (i/2) H0(kappa r) after removing the log part
        self.log_diag = 0.5j - np.euler_gamma / np.pi - np.log(kappa * self.speed / 2) / np.pi

    def _nystrom(self, full, log_part, diag):
        smooth = full - log_part * self.LOG
        np.fill_diagonal(smooth, diag)
        return self.R * log_part + (np.pi / self.n) * smooth

    @cached_property
    def S2(self) -> np.ndarray:
        sp = self.speed[None, :]
        return self._nystrom(
            0.5j * self.H0 * sp,
            -self.J0 * sp / (2 * np.pi),
            self.log_diag * self.speed,
        )

    @cached_property
    def K2(self) -> np.ndarray:
        # n(tau) . (x(t) - x(tau))
        proj = (self.nvec[None, :, :] * self.diff).sum(-1)
        k = self.kappa
        return self._nystrom(
            0.5j * k * proj * self.H1_over_r,
            -(k / (2 * np.pi)) * proj * self.J1_over_r,
            self.curvature_term / (2 * np.pi),
        )

    @cached_property
    def K2_adjoint(self) -> np.ndarray:
        # n(t) . (x(tau) - x(t)) |x'(tau)| / |x'(t)|
        proj = -(self.nvec[:, None, :] * self.diff).sum(-1)
        scale = self.speed[None, :] / self.speed[:, None]
        k = self.kappa
        return self._nystrom(
            0.5j * k * proj * self.H1_over_r * scale,
            -(k / (2 * np.pi)) * proj * self.J1_over_r * scale,
            self.curvature_term / (2 * np.pi),
        )

    @cached_property
    def T2_remainder(self) -> np.ndarray:
        """``2T`` minus its Fourier-multiplier part, times ``|x'(t)|``.

        ``2|x'(t)| T psi = d/dt A psi' + kappa^2 B psi`` (Maue), with the
        ``-(1/2pi) ln`` part of ``A`` handled by the multiplier.
        """
        D = quadrature.diff_matrix(self.n)
        A_rest = self._nystrom(
            0.5j * self.H0 + self.LOG / (2 * np.pi),
            (1.0 - self.J0) / (2 * np.pi),
            self.log_diag,
        )
        nn = self.nvec @ self.nvec.T
        B = self._nystrom(
            0.5j * self.H0 * nn,
            -self.J0 * nn / (2 * np.pi),
            self.log_diag * self.speed**2,
        )
        return D @ A_rest @ D + self.kappa**2 * B

    @cached_property
    def T2(self) -> np.ndarray:
        H = quadrature.abs_derivative_matrix(self.n)
        return (H + self.T2_remainder) / self.speed[:, None]

    def farfield_matrices(self, n_f: int, k: float):
        """Matrices mapping boundary values to far-field contributions.

        Returns ``(E_dl, E_sl)``: far fields of the double and single layer
        densities, ``u_inf = E_dl @ phi + E_sl @ psi`` for
        ``u^s = D phi + S psi``.
        """
        xhat = np.column_stack([np.cos(farfield_grid(n_f)), np.sin(farfield_grid(n_f))])
        E = np.exp(-1j * k * (xhat @ self.x.T))
        w = farfield_constant(k) * np.pi / self.n
        E_dl = w * (-1j * k) * (xhat @ self.nvec.T) * E
        E_sl = w * self.speed[None, :] * E
        return E_dl, E_sl


@dataclass
class BoundaryTraces:
    """Total-field traces at the quadrature nodes.

    ``dudt`` is the tangential derivative with respect to arclength;
    interior traces are set for transmission problems only.
    """

    u: np.ndarray
    dudn: np.ndarray
    dudt: np.ndarray
    u_int: np.ndarray | None = None
    dudn_int: np.ndarray | None = None


class NystromSolver:
    """Assembled and factorized Nyström system for one (curve, bc, k).

    Immutable after construction; right-hand-side solves against the
    retained LU factorization are independent of each other.
    """

    def __init__(self, curve: Curve, bc: BoundaryCondition, k: float, n_q: int = DEFAULT_NQ, eta=None):
        if k <= 0:
            raise ValueError("wavenumber must be positive")
        self.curve = curve
        self.bc = bc
        self.k = float(k)
        self.n_q = int(n_q)
        self.eta = self.k if eta is None else float(eta)
        self.ops = LayerOperators(curve, self.k, self.n_q)
        self.t = self.ops.t
        N = 2 * self.n_q
        I = np.eye(N)
        ops, ieta = self.ops, 1j * self.eta
        if isinstance(bc, Dirichlet):
            A = I + ops.K2 - ieta * ops.S2
        elif isinstance(bc, Neumann):
            A = ops.T2 - ieta * ops.K2_adjoint + ieta * I
        elif isinstance(bc, Impedance):
            A = ops.T2 - ieta * ops.K2_adjoint + ieta * I + bc.mu * (I + ops.K2 - ieta * ops.S2)
        elif isinstance(bc, Transmission):
            self.k_int = self.k * np.sqrt(bc.n + 0j)
            self.ops_int = LayerOperators(curve, self.k_int, self.n_q)
            lam = bc.lam
            oi = self.ops_int
            dT = (oi.T2_remainder - ops.T2_remainder) / ops.speed[:, None]
            A = np.block(
                [
                    [(1 + lam) * I + lam * oi.K2 - ops.K2, lam * (ops.S2 - oi.S2)],
                    [dT, (1 + lam) * I + lam * ops.K2_adjoint - oi.K2_adjoint],
                ]
            )
        else:
            raise TypeError(f"unsupported boundary condition {bc!r}")
        self.matrix = A
        self._lu = scipy.linalg.lu_factor(A, check_finite=True)
        anorm = np.abs(A).sum(0).max()
        gecon = scipy.linalg.get_lapack_funcs("gecon", (self._lu[0],))
        rcond, info = gecon(self._lu[0], anorm, norm="1")
        if rcond < RCOND_MIN:
            raise SolverSingularError(f"system matrix reciprocal condition {rcond:.2e}")
        self.rcond = float(rcond)

    @property
    def is_transmission(self) -> bool:
        return isinstance(self.bc, Transmission)

    def incident_data(self, w: PlaneWaveSuperposition):
        """Boundary data of ``w`` at the nodes (pair for transmission)."""
        return trace_data(w, self.curve, self.t, self.bc)

    def solve_density(self, data):
        """Solve for the boundary unknowns given boundary data.

        Scalar conditions: ``data`` has shape ``(2n,)`` or ``(2n, P)`` and
        the combined-potential density is returned. Transmission: ``data``
        is ``(f1, f2)`` and the interior traces ``(v, w)`` are returned.
        """
        ops = self.ops
        if not self.is_transmission:
            return scipy.linalg.lu_solve(self._lu, 2 * np.asarray(data))
        f1, f2 = (np.asarray(d) for d in data)
        rhs1 = -f1 + ops.K2 @ f1 - ops.S2 @ f2
        rhs2 = ops.T2 @ f1 - ops.K2_adjoint @ f2 - f2
        sol = scipy.linalg.lu_solve(self._lu, np.concatenate([rhs1, rhs2]))
        N = 2 * self.n_q
        return sol[:N], sol[N:]

    def _scattered_traces(self, data, density):
        """Exterior traces ``(u^s_+, du^s_+/dnu)`` of the scattered field."""
        ops = self.ops
        if self.is_transmission:
            f1, f2 = data
            v, w = density
            return v + f1, self.bc.lam * w + f2
        psi = density
        ieta = 1j * self.eta
        us = 0.5 * (psi + ops.K2 @ psi - ieta * (ops.S2 @ psi))
        dus = 0.5 * (ops.T2 @ psi - ieta * (ops.K2_adjoint @ psi) + ieta * psi)
        return us, dus

    def far_field_from_data(self, data, n_f: int) -> np.ndarray:
        """Far-field samples of the radiating solution with the given data."""
        density = self.solve_density(data)
        return self._far_field(data, density, n_f)

    def _far_field(self, data, density, n_f):
        E_dl, E_sl = self._farfield_mats(n_f)
        if self.is_transmission:
            us, dus = self._scattered_traces(data, density)
            return E_dl @ us - E_sl @ dus
        return E_dl @ density - 1j * self.eta * (E_sl @ density)

    def _farfield_mats(self, n_f):
        cache = self.__dict__.setdefault("_ff_cache", {})
        if n_f not in cache:
            cache[n_f] = self.ops.farfield_matrices(n_f, self.k)
        return cache[n_f]

    def solve(self, w: PlaneWaveSuperposition, n_f: int = 128) -> FarFieldPattern:
        if not np.isclose(w.k, self.k, rtol=0, atol=1e-14):
            raise ValueError("incident wavenumber differs from the assembled one")
        samples = self.far_field_from_data(self.incident_data(w), n_f)
        return FarFieldPattern(samples, self.k, w.to_json(), self.bc.name)

    def total_traces(self, w: PlaneWaveSuperposition) -> BoundaryTraces:
        """Total field traces on the boundary for incident field ``w``."""
        data = self.incident_data(w)
        density = self.solve_density(data)
        return self.traces_from_solution(w, data, density)

    def traces_from_solution(self, w, data, density) -> BoundaryTraces:
        jet_x = self.ops.x
        ui = w.value(jet_x)
        dui = (w.gradient(jet_x) * self.ops.unit_normal).sum(-1)
        us, dus = self._scattered_traces(data, density)
        u = ui + us
        dudn = dui + dus
        dudt = quadrature.differentiate(u) / self.ops.speed
        if self.is_transmission:
            v, wn = density
            return BoundaryTraces(u, dudn, dudt, u_int=v, dudn_int=wn)
        return BoundaryTraces(u, dudn, dudt)


def _solve_adaptive(curve, bc, w, n_f, n_q, eta):
    if n_q is not None:
        return NystromSolver(curve, bc, w.k, n_q, eta).solve(w, n_f)
    n = DEFAULT_NQ
    prev = NystromSolver(curve, bc, w.k, n, eta).solve(w, n_f)
    while n < MAX_NQ:
        n *= 2
        cur = NystromSolver(curve, bc, w.k, n, eta).solve(w, n_f)
        change = np.abs(cur.samples - prev.samples).max()
        prev = cur
        if change < ADAPTIVE_TOL:
            break
    else:
        logger.warning("far field not converged to %.0e at n_q=%d", ADAPTIVE_TOL, MAX_NQ)
    return prev


def solve_exterior(
    curve: Curve,
    bc: BoundaryCondition,
    w: PlaneWaveSuperposition,
    n_f: int = 128,
    n_q: int | None = None,
    eta: float | None = None,
) -> FarFieldPattern:
    """Far field for a sound-soft, sound-hard or impedance obstacle.

    With ``n_q=None`` the node count doubles from 64 until the far field
    changes by less than 1e-8 (or 512 is reached).
    """
    if isinstance(bc, Transmission):
        raise TypeError("use solve_transmission for penetrable obstacles")
    return _solve_adaptive(curve, bc, w, n_f, n_q, eta)


def solve_transmission(
    curve: Curve,
    bc: Transmission,
    w: PlaneWaveSuperposition,
    n_f: int = 128,
    n_q: int | None = None,
) -> FarFieldPattern:
    """Far field for a penetrable obstacle."""
    if not isinstance(bc, Transmission):
        raise TypeError("solve_transmission needs a Transmission condition")
    return _solve_adaptive(curve, bc, w, n_f, n_q, None)


def solve(curve, bc, w, n_f=128, n_q=None) -> FarFieldPattern:
    """Dispatch to :func:`solve_exterior` or :func:`solve_transmission`."""
    if isinstance(bc, Transmission):
        return solve_transmission(curve, bc, w, n_f, n_q)
    return solve_exterior(curve, bc, w, n_f, n_q)
