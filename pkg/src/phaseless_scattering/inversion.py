"""Levenberg-Marquardt reconstruction recursive in frequency.

At each wavenumber the phaseless equations are linearized at the current
iterate and the update minimizes

    sum_l ||F_l + F'_l[d] - y_l||^2 + beta (da1^2 + da2^2 + ||dr||_{H^s}^2 + dlam^2)

with ``beta`` chosen by bisection so that the linearized residual drops to
``rho`` times the current one. Iterations at a wavenumber stop once the
mean relative residual falls below ``tau * delta``; the result seeds the
next wavenumber.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .conditions import BoundaryCondition, Transmission
from .forward import SolverSingularError
from .frechet import linearize
from .geometry import GEOMETRY_GRID, R_MIN, StarlikeCurve, hs_weights
from .phaseless import PhaselessDataset, l2_norm

logger = logging.getLogger(__name__)

DEFAULT_KS = (0.5, 1.0, 3.0, 5.0, 7.0, 9.0, 11.0)
LAM_MIN = 1e-3
MAX_HALVINGS = 30


class SingularNormalEquations(np.linalg.LinAlgError):
    """The regularized normal equations could not be solved."""


class ZeroDataError(ValueError):
    """A measured intensity vector has zero norm."""


@dataclass(frozen=True, eq=False)
class IterateState:
    """Current boundary approximation and, for penetrable obstacles, ``lam``."""

    curve: StarlikeCurve
    lam: float | None = None

    @property
    def order(self) -> int:
        return self.curve.order

    def to_vector(self) -> np.ndarray:
        p = self.curve.to_vector()
        return p if self.lam is None else np.append(p, self.lam)

    def with_vector(self, p: np.ndarray) -> IterateState:
        if self.lam is None:
            return IterateState(StarlikeCurve.from_vector(p))
        return IterateState(StarlikeCurve.from_vector(p[:-1]), float(p[-1]))

    def padded(self, order: int) -> IterateState:
        c = self.curve
        if c.order == order:
            return self
        return IterateState(StarlikeCurve(c.center, c.radial_poly.padded(order)), self.lam)

    def to_json(self) -> dict:
        out = self.curve.to_json()
        if self.lam is not None:
            out["lam"] = self.lam
        return out

    @classmethod
    def from_json(cls, obj: dict) -> IterateState:
        lam = obj.get("lam")
        return cls(StarlikeCurve.from_json(obj), None if lam is None else float(lam))


@dataclass
class InversionConfig:
    s: float = 1.6
    M: int = 25
    rho: float = 0.8
    tau: float = 1.5
    delta: float = 0.05
    ks: tuple = DEFAULT_KS
    max_iter: int = 50
    beta_bracket: tuple = (1e-10, 1e10)
    bisect_tol: float = 1e-3
    bisect_max_iter: int = 200
    n_q: int = 64
    n_f: int = 128
    r_min: float = R_MIN

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.tau <= 1:
            raise ValueError("tau must exceed 1")
        if self.s < 0:
            raise ValueError("Sobolev exponent must be non-negative")
        self.ks = tuple(float(k) for k in self.ks)

    @property
    def stop_level(self) -> float:
        # noise-free runs stop at a fixed floor
        return max(self.tau * self.delta, 1e-8)


def penalty_weights(order: int, s: float, transmission: bool) -> np.ndarray:
    """Diagonal of the penalty ``|da|^2 + ||dr||_{H^s}^2 (+ dlam^2)``."""
    w = np.concatenate([[1.0, 1.0], hs_weights(order, s)])
    return np.append(w, 1.0) if transmission else w


def _linear_system(J: np.ndarray, residual: np.ndarray, n_f: int):
    """Gram matrix and right-hand side of the discrete-L^2 least squares."""
    c = 2 * np.pi / n_f
    Js = J.reshape(-1, J.shape[-1])
    rs = residual.reshape(-1)
    return c * (Js.T @ Js), c * (Js.T @ rs)


def lm_update(J: np.ndarray, residual: np.ndarray, weights: np.ndarray, beta: float, n_f: int = None) -> np.ndarray:
    """Minimizer of ``||J d - residual||^2 + beta d^T diag(weights) d``.

    ``J`` has shape ``(n_d, n_f, P)`` and ``residual = data - F`` shape
    ``(n_d, n_f)``; norms are the discrete ``L^2(S^1)`` norms.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    n_f = residual.shape[-1] if n_f is None else n_f
    G, b = _linear_system(J, residual, n_f)
    return _solve_normal(G, b, weights, beta)


def _solve_normal(G, b, weights, beta):
    A = G + beta * np.diag(weights)
    try:
        return scipy.linalg.solve(A, b, assume_a="pos")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularNormalEquations(str(exc)) from exc


def predicted_residual(J, residual, delta_p) -> float:
    """``(sum_l ||F_l + F'_l[d] - y_l||^2)^(1/2)`` of the linearized model."""
    lin = residual - J @ delta_p
    return float(np.sqrt((l2_norm(lin) ** 2).sum()))


@dataclass
class BetaChoice:
    beta: float
    update: np.ndarray
    ratio: float
    bracket_failed: bool = False


def select_beta(J, residual, weights, rho: float, config: InversionConfig | None = None) -> BetaChoice:
    """Bisection (in log beta) for a linearized residual ratio of ``rho``.

    If no admissible ``beta`` reaches the target, the update at the
    smallest ``beta`` tried is returned with ``bracket_failed`` set.
    """
    config = config or InversionConfig(rho=rho)
    n_f = residual.shape[-1]
    G, b = _linear_system(J, residual, n_f)
    current = float(np.sqrt((l2_norm(residual) ** 2).sum()))
    if current <= 0:
        raise ValueError("current residual must be positive")

    def ratio(beta):
        d = _solve_normal(G, b, weights, beta)
        return predicted_residual(J, residual, d) / current, d

    lo, hi = config.beta_bracket
    # below this the penalty is lost in rounding against the Gram matrix
    floor = 1e-14 * max(float(np.abs(np.diag(G)).max()), 1e-300)
    r_lo, d_lo = ratio(lo)
    while r_lo > rho and lo > floor:
        lo = max(lo * 1e-2, floor)
        r_lo, d_lo = ratio(lo)
    if r_lo > rho:
        return BetaChoice(lo, d_lo, r_lo, bracket_failed=True)
    r_hi, d_hi = ratio(hi)
    while r_hi < rho:
        hi *= 1e2
        r_hi, d_hi = ratio(hi)
    # relative to rho, and to the gap 1 - rho so that targets near 1 stay meaningful
    tol = config.bisect_tol * min(rho, 1 - rho)
    best = (lo, r_lo, d_lo)
    for _ in range(config.bisect_max_iter):
        mid = np.sqrt(lo * hi)
        r_mid, d_mid = ratio(mid)
        best = (mid, r_mid, d_mid)
        if abs(r_mid - rho) <= tol:
            break
        if r_mid > rho:
            hi = mid
        else:
            lo = mid
    beta, r, d = best
    return BetaChoice(float(beta), d, float(r))


def relative_error(F: np.ndarray, data: np.ndarray) -> float:
    """Mean over direction pairs of ``||F_l - y_l|| / ||y_l||``."""
    norms = l2_norm(data)
    if np.any(norms == 0):
        raise ZeroDataError("measured intensity vector with zero norm")
    return float(np.mean(l2_norm(F - data) / norms))


@dataclass
class FrequencyRecord:
    k: float
    iterations: int
    err_before: float
    err_after: float
    beta_history: list = field(default_factory=list)
    residual_increases: int = 0
    hit_cap: bool = False
    bracket_failures: int = 0
    backtracks: int = 0


@dataclass
class Reconstruction:
    """Final state, the state after each frequency, and the per-frequency log."""

    state: IterateState
    trajectory: list
    records: list

    def report(self) -> dict:
        return {
            "frequencies": [asdict(r) for r in self.records],
            "final": self.state.to_json(),
        }


def _bc_at(bc: BoundaryCondition, state: IterateState) -> BoundaryCondition:
    if isinstance(bc, Transmission):
        return Transmission(bc.n, state.lam)
    return bc


def _guarded_step(state: IterateState, d: np.ndarray, r_min: float):
    """Apply ``d``, halving it until the radius and ``lam`` stay admissible."""
    p = state.to_vector()
    for halvings in range(MAX_HALVINGS + 1):
        cand = state.with_vector(p + d)
        ok = cand.curve.min_radius(GEOMETRY_GRID) >= r_min
        if cand.lam is not None:
            ok = ok and cand.lam >= LAM_MIN
        if ok:
            return cand, halvings
        d = d / 2
    return state, MAX_HALVINGS


def iterate_frequency(state, data, incidences, bc, k, config, record: FrequencyRecord):
    """Newton iterations at one wavenumber; returns the final state."""
    transmission = isinstance(bc, Transmission)
    weights = penalty_weights(config.M, config.s, transmission)
    prev_res = None
    while True:
        F, J = linearize(state.curve, _bc_at(bc, state), k, incidences, config.n_f, config.n_q)
        err = relative_error(F, data)
        residual = data - F
        res = float(np.sqrt((l2_norm(residual) ** 2).sum()))
        if record.iterations == 0:
            record.err_before = err
        record.err_after = err
        if prev_res is not None and res > prev_res:
            record.residual_increases += 1
            logger.info("k=%g iteration %d: residual rose %.4e -> %.4e", k, record.iterations, prev_res, res)
        if err < config.stop_level:
            return state
        if record.iterations >= config.max_iter:
            record.hit_cap = True
            logger.warning("k=%g: iteration cap %d reached (Err=%.3e)", k, config.max_iter, err)
            return state
        choice = select_beta(J, residual, weights, config.rho, config)
        record.beta_history.append(choice.beta)
        if choice.bracket_failed:
            record.bracket_failures += 1
        state, halvings = _guarded_step(state, choice.update, config.r_min)
        record.backtracks += halvings
        record.iterations += 1
        prev_res = res


def reconstruct(
    initial: IterateState,
    dataset: PhaselessDataset,
    bc: BoundaryCondition,
    config: InversionConfig | None = None,
) -> Reconstruction:
    """Run the frequency-recursive reconstruction over all dataset wavenumbers."""
    config = config or InversionConfig()
    if isinstance(bc, Transmission) and (initial.lam is None or initial.lam <= 0):
        raise ValueError("transmission inversion needs a positive initial lam")
    if dataset.n_f != config.n_f:
        config = InversionConfig(**{**asdict(config), "n_f": dataset.n_f})
    state = initial.padded(config.M)
    if not isinstance(bc, Transmission):
        state = IterateState(state.curve)
    trajectory, records = [], []
    for m, k in enumerate(dataset.ks):
        record = FrequencyRecord(float(k), 0, np.nan, np.nan)
        try:
            state = iterate_frequency(state, dataset.slice(m), dataset.incidences(k), bc, k, config, record)
        except SolverSingularError:
            logger.warning("k=%g: forward solver singular, keeping previous iterate", k)
        trajectory.append(state)
        records.append(record)
        logger.info(
            "k=%g: %d iterations, Err %.4f -> %.4f", k, record.iterations, record.err_before, record.err_after
        )
    return Reconstruction(state, trajectory, records)
