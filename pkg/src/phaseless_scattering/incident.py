"""Plane waves and superpositions of plane waves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conditions import BoundaryCondition, Dirichlet, Impedance, Neumann, Transmission
from .geometry import Curve


def direction(angle: float) -> np.ndarray:
    return np.array([np.cos(angle), np.sin(angle)])


@dataclass(frozen=True, eq=False)
class PlaneWaveSuperposition:
    """``u^i(x) = sum_j exp(i k d_j . x)`` for one or two unit directions."""

    k: float
    directions: np.ndarray

    def __post_init__(self):
        d = np.array(self.directions, dtype=float).reshape(-1, 2)
        if self.k <= 0:
            raise ValueError("wavenumber must be positive")
        if not 1 <= len(d) <= 2:
            raise ValueError("one or two incident directions expected")
        if np.any(np.abs(np.hypot(d[:, 0], d[:, 1]) - 1) > 1e-14):
            raise ValueError("incident directions must be unit vectors")
        if len(d) == 2 and np.allclose(d[0], d[1], atol=1e-12):
            raise ValueError("superposed directions must differ")
        d.setflags(write=False)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "k", float(self.k))

    @classmethod
    def from_angles(cls, k: float, angles, degrees: bool = False) -> PlaneWaveSuperposition:
        a = np.atleast_1d(np.asarray(angles, dtype=float))
        if degrees:
            a = np.deg2rad(a)
        return cls(k, np.stack([np.cos(a), np.sin(a)], axis=-1))

    @property
    def angles(self) -> np.ndarray:
        return np.arctan2(self.directions[:, 1], self.directions[:, 0])

    def single(self, j: int) -> PlaneWaveSuperposition:
        return PlaneWaveSuperposition(self.k, self.directions[j])

    def with_k(self, k: float) -> PlaneWaveSuperposition:
        return PlaneWaveSuperposition(k, self.directions)

    def to_json(self) -> dict:
        return {"k": self.k, "angles_deg": np.rad2deg(self.angles).tolist()}

    def _phases(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(1j * self.k * (x @ self.directions.T))

    def value(self, x):
        return self._phases(x).sum(-1)

    def gradient(self, x):
        """Gradient with shape ``x.shape``."""
        return (1j * self.k) * (self._phases(x) @ self.directions)


def field_value(w: PlaneWaveSuperposition, x):
    return w.value(x)


def trace_data(w: PlaneWaveSuperposition, curve: Curve, t, bc: BoundaryCondition):
    """Boundary data of the scattered field induced by ``w``.

    Returns one complex array, or the pair ``(f1, f2)`` for transmission.
    """
    jet = curve.jet(t)
    ui = w.value(jet.point)
    dui = (w.gradient(jet.point) * jet.normal).sum(-1)
    if isinstance(bc, Dirichlet):
        return -ui
    if isinstance(bc, Neumann):
        return -dui
    if isinstance(bc, Impedance):
        return -(dui + bc.mu * ui)
    if isinstance(bc, Transmission):
        return -ui, -dui
    raise TypeError(f"unsupported boundary condition {bc!r}")
