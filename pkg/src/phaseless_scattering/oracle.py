"""Cylindrical-wave series far fields for circular obstacles.

With ``u^i = sum_m i^m J_m(kr) e^{im(phi - theta_d)}`` the scattered field is
``sum_m i^m c_m H_m(kr) e^{im(phi - theta_d)}`` and the far field is
``sqrt(2/(pi k)) e^{-i pi/4} sum_m c_m e^{im(phi - theta_d)}``. A circle
centered at ``c`` picks up the factor ``exp(i k c.(d - xhat))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .conditions import BoundaryCondition, Dirichlet, Impedance, Neumann, Transmission
from .forward import FarFieldPattern, farfield_grid
from .incident import PlaneWaveSuperposition

TAIL_TOL = 1e-13


class ModeSingularError(ArithmeticError):
    """A per-mode interface system is singular at this wavenumber."""


@dataclass(frozen=True)
class SeriesTruncation:
    m_max: int
    tail_bound: float


def mode_coefficients(R: float, bc: BoundaryCondition, k: float, m: np.ndarray) -> np.ndarray:
    """Scattering coefficients ``c_m`` of a circle of radius ``R`` at the origin."""
    if R <= 0:
        raise ValueError("radius must be positive")
    kR = k * R
    m = np.asarray(m)
    J, dJ = special.jv(m, kR), special.jvp(m, kR)
    H, dH = special.hankel1(m, kR), special.h1vp(m, kR)
    if isinstance(bc, Dirichlet):
        return -J / H
    if isinstance(bc, Neumann):
        return -dJ / dH
    if isinstance(bc, Impedance):
        q = bc.mu / k
        return -(dJ + q * J) / (dH + q * H)
    if isinstance(bc, Transmission):
        ki = k * np.sqrt(bc.n + 0j)
        kiR = ki * R
        Ji, dJi = special.jv(m, kiR), special.jvp(m, kiR)
        # [H, -Ji; k H', -lam ki Ji'] [c, b]^T = [-J, -k J']^T
        a11, a12 = H, -Ji
        a21, a22 = k * dH, -bc.lam * ki * dJi
        det = a11 * a22 - a12 * a21
        scale = np.abs(a11 * a22) + np.abs(a12 * a21)
        if np.any(np.abs(det) <= 1e-14 * scale):
            raise ModeSingularError("interface system singular; choose another wavenumber")
        b1, b2 = -J, -k * dJ
        return (b1 * a22 - a12 * b2) / det
    raise TypeError(f"unsupported boundary condition {bc!r}")


def truncation(R: float, bc: BoundaryCondition, k: float) -> SeriesTruncation:
    """Mode cutoff ``max(20, ceil(kR) + 15)``, extended until the tail is below 1e-13."""
    m_max = max(20, math.ceil(k * R) + 15)
    while True:
        tail = np.abs(mode_coefficients(R, bc, k, np.arange(m_max - 2, m_max + 1))).max()
        if tail < TAIL_TOL or m_max >= 190:
            return SeriesTruncation(m_max, float(tail))
        m_max += 5


def series_farfield(
    R: float,
    center,
    bc: BoundaryCondition,
    k: float,
    d,
    n_f: int = 128,
) -> FarFieldPattern:
    """Far field of a circle for one or two incident directions ``d``."""
    w = PlaneWaveSuperposition(k, d)
    trunc = truncation(R, bc, k)
    m = np.arange(-trunc.m_max, trunc.m_max + 1)
    c = mode_coefficients(R, bc, k, m)
    theta = farfield_grid(n_f)
    xhat = np.column_stack([np.cos(theta), np.sin(theta)])
    center = np.asarray(center, dtype=float)
    total = np.zeros(n_f, dtype=complex)
    pref = np.sqrt(2 / (np.pi * k)) * np.exp(-1j * np.pi / 4)
    for dj, th_d in zip(w.directions, w.angles):
        pattern = pref * (np.exp(1j * np.outer(theta - th_d, m)) @ c)
        total += np.exp(1j * k * ((dj[None, :] - xhat) @ center)) * pattern
    return FarFieldPattern(total, k, w.to_json(), bc.name)


circle_oracle = series_farfield
