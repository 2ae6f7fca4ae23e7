"""Closed boundary curves and their differential geometry.

All curves are 2pi-periodic, counter-clockwise parametrizations, so the
rotated tangent ``(x2', -x1')`` points into the exterior.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

GEOMETRY_GRID = 512
R_MIN = 0.05


class CurveJet(NamedTuple):
    """Point, derivatives and normal data of a curve at parameter values.

    Vector fields have shape ``(..., 2)``; ``speed`` is ``|x'(t)|``.
    """

    point: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    normal: np.ndarray
    speed: np.ndarray


def _unit_columns(t):
    t = np.asarray(t, dtype=float)
    c, s = np.cos(t), np.sin(t)
    return np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Real trigonometric polynomial of order M.

    ``alpha[0]`` is the constant term, ``alpha[l]`` multiplies ``cos(l t)``
    and ``alpha[l + M]`` multiplies ``sin(l t)`` for ``1 <= l <= M``.
    """

    alpha: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float).ravel()
        if a.size % 2 != 1:
            raise ValueError("coefficient vector must have odd length 2M+1")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def order(self) -> int:
        return (self.alpha.size - 1) // 2

    @classmethod
    def constant(cls, value: float, order: int = 0) -> TrigPolynomial:
        a = np.zeros(2 * order + 1)
        a[0] = value
        return cls(a)

    def evaluate(self, t, derivative: int = 0):
        """Value of the ``derivative``-th derivative at ``t``."""
        t = np.asarray(t, dtype=float)
        M = self.order
        a = self.alpha
        if derivative == 0:
            out = np.full(t.shape, a[0])
        else:
            out = np.zeros(t.shape)
        if M == 0:
            return out
        l = np.arange(1, M + 1)
        lt = np.multiply.outer(t, l)
        cos_lt, sin_lt = np.cos(lt), np.sin(lt)
        # d^p/dt^p of cos/sin cycles with period 4
        p = derivative % 4
        scale = l.astype(float) ** derivative
        if p == 0:
            fc, fs = cos_lt, sin_lt
        elif p == 1:
            fc, fs = -sin_lt, cos_lt
        elif p == 2:
            fc, fs = -cos_lt, -sin_lt
        else:
            fc, fs = sin_lt, -cos_lt
        return out + (fc * (scale * a[1 : M + 1])).sum(-1) + (fs * (scale * a[M + 1 :])).sum(-1)

    __call__ = evaluate

    def padded(self, order: int) -> TrigPolynomial:
        """Same function written with ``order`` modes (order >= current)."""
        M = self.order
        if order < M:
            raise ValueError("cannot pad to a lower order")
        a = np.zeros(2 * order + 1)
        a[0] = self.alpha[0]
        a[1 : M + 1] = self.alpha[1 : M + 1]
        a[order + 1 : order + 1 + M] = self.alpha[M + 1 :]
        return TrigPolynomial(a)


def hs_weights(order: int, s: float) -> np.ndarray:
    """Diagonal of the H^s quadratic form on the coefficient vector."""
    if s < 0:
        raise ValueError("Sobolev exponent must be non-negative")
    l = np.arange(1, order + 1, dtype=float)
    w = np.pi * (1.0 + l**2) ** s
    return np.concatenate([[2 * np.pi], w, w])


def hs_norm_squared(p: TrigPolynomial, s: float) -> float:
    """Squared H^s(0, 2pi) norm ``2 pi a0^2 + pi sum (1+l^2)^s (a_l^2 + a_{l+M}^2)``."""
    return float(hs_weights(p.order, s) @ (p.alpha**2))


class Curve:
    """Base class of parametrized closed curves.

    Subclasses implement :meth:`derivatives`, returning ``x, x', x''``.
    """

    def derivatives(self, t):
        raise NotImplementedError

    def point(self, t) -> np.ndarray:
        return self.derivatives(t)[0]

    def jet(self, t) -> CurveJet:
        x, dx, ddx = self.derivatives(t)
        speed = np.hypot(dx[..., 0], dx[..., 1])
        if np.any(speed < 1e-12):
            raise ValueError("degenerate curve: |x'(t)| vanishes")
        normal = np.stack([dx[..., 1], -dx[..., 0]], axis=-1) / speed[..., None]
        return CurveJet(x, dx, ddx, normal, speed)

    def translated(self, offset) -> Curve:
        return TranslatedCurve(self, np.asarray(offset, dtype=float))

    def polyline(self, n: int = GEOMETRY_GRID) -> np.ndarray:
        t = 2 * np.pi * np.arange(n) / n
        return np.column_stack([t, self.point(t)])


@dataclass(frozen=True, eq=False)
class TranslatedCurve(Curve):
    base: Curve
    offset: np.ndarray

    def derivatives(self, t):
        x, dx, ddx = self.base.derivatives(t)
        return x + self.offset, dx, ddx


class RadialCurve(Curve):
    """Curve ``c + r(t) (cos t, sin t)``; subclasses supply ``radial``."""

    center: np.ndarray

    def radial(self, t):
        """Return ``r, r', r''`` at ``t``."""
        raise NotImplementedError

    def derivatives(self, t):
        r, dr, ddr = self.radial(t)
        e, e_perp = _unit_columns(t)
        c = np.asarray(self.center, dtype=float)
        x = c + r[..., None] * e
        dx = dr[..., None] * e + r[..., None] * e_perp
        ddx = (ddr - r)[..., None] * e + 2 * dr[..., None] * e_perp
        return x, dx, ddx


@dataclass(frozen=True, eq=False)
class StarlikeCurve(RadialCurve):
    """Starlike curve with free center and trigonometric radial function."""

    center: np.ndarray
    radial_poly: TrigPolynomial

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(2)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)

    @classmethod
    def circle(cls, r0: float, center=(0.0, 0.0), order: int = 0) -> StarlikeCurve:
        return cls(center, TrigPolynomial.constant(r0, order))

    @classmethod
    def from_vector(cls, p: np.ndarray) -> StarlikeCurve:
        """Inverse of :meth:`to_vector`: ``(a1, a2, alpha_0..alpha_2M)``."""
        return cls(p[:2], TrigPolynomial(p[2:]))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.center, self.radial_poly.alpha])

    @property
    def order(self) -> int:
        return self.radial_poly.order

    def radial(self, t):
        rp = self.radial_poly
        return rp(t), rp(t, 1), rp(t, 2)

    def min_radius(self, n: int = GEOMETRY_GRID) -> float:
        t = 2 * np.pi * np.arange(n) / n
        return float(self.radial_poly(t).min())

    def translated(self, offset) -> StarlikeCurve:
        return StarlikeCurve(self.center + np.asarray(offset, dtype=float), self.radial_poly)

    def to_json(self) -> dict:
        return {"center": self.center.tolist(), "alpha": self.radial_poly.alpha.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> StarlikeCurve:
        return cls(obj["center"], TrigPolynomial(obj["alpha"]))


@dataclass(frozen=True, eq=False)
class Circle(RadialCurve):
    r0: float = 1.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", np.array(self.center, dtype=float).reshape(2))

    def radial(self, t):
        t = np.asarray(t, dtype=float)
        z = np.zeros(t.shape)
        return np.full(t.shape, float(self.r0)), z, z

    def translated(self, offset) -> Circle:
        return Circle(self.r0, self.center + np.asarray(offset, dtype=float))


@dataclass(frozen=True, eq=False)
class AppleShaped(RadialCurve):
    """``[(0.5 + 0.4 cos t + 0.1 sin 2t) / (1 + 0.7 cos t)] (cos t, sin t)``."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def radial(self, t):
        t = np.asarray(t, dtype=float)
        num = 0.5 + 0.4 * np.cos(t) + 0.1 * np.sin(2 * t)
        dnum = -0.4 * np.sin(t) + 0.2 * np.cos(2 * t)
        ddnum = -0.4 * np.cos(t) - 0.4 * np.sin(2 * t)
        den = 1 + 0.7 * np.cos(t)
        dden = -0.7 * np.sin(t)
        ddden = -0.7 * np.cos(t)
        r = num / den
        dr = (dnum - r * dden) / den
        ddr = (ddnum - 2 * dr * dden - r * ddden) / den
        return r, dr, ddr


@dataclass(frozen=True, eq=False)
class RoundedTriangle(RadialCurve):
    """``(2 + 0.3 cos 3t) (cos t, sin t)``."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def radial(self, t):
        t = np.asarray(t, dtype=float)
        return 2 + 0.3 * np.cos(3 * t), -0.9 * np.sin(3 * t), -2.7 * np.cos(3 * t)


@dataclass(frozen=True, eq=False)
class KiteShaped(Curve):
    """``(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)``."""

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        c2, s2 = np.cos(2 * t), np.sin(2 * t)
        x = np.stack([c + 0.65 * c2 - 0.65, 1.5 * s], axis=-1)
        dx = np.stack([-s - 1.3 * s2, 1.5 * c], axis=-1)
        ddx = np.stack([-c - 2.6 * c2, -1.5 * s], axis=-1)
        return x, dx, ddx


BENCHMARKS = {
    "apple": AppleShaped,
    "kite": KiteShaped,
    "rounded_triangle": RoundedTriangle,
}


def benchmark(kind: str, **kwargs) -> Curve:
    """Build a benchmark curve by name (``circle`` takes ``r0`` and ``center``)."""
    if kind == "circle":
        return Circle(kwargs.get("r0", 1.0), kwargs.get("center", (0.0, 0.0)))
    try:
        return BENCHMARKS[kind]()
    except KeyError:
        raise ValueError(f"unknown benchmark curve {kind!r}") from None


def curve_point(curve: Curve, t):
    return curve.point(t)


def curve_jet(curve: Curve, t) -> CurveJet:
    return curve.jet(t)


@dataclass(frozen=True, eq=False)
class PerturbedCurve(Curve):
    """``x(t) + eps * h(t)`` for a displacement field with two derivatives."""

    base: Curve
    displacement: object
    eps: float = 1.0

    def derivatives(self, t):
        x, dx, ddx = self.base.derivatives(t)
        h, dh, ddh = self.displacement.derivatives(t)
        e = self.eps
        return x + e * h, dx + e * dh, ddx + e * ddh


def write_curve_json(curve: StarlikeCurve, path) -> None:
    with open(path, "w") as fh:
        json.dump(curve.to_json(), fh, indent=2)


def read_curve_json(path) -> StarlikeCurve:
    with open(path) as fh:
        return StarlikeCurve.from_json(json.load(fh))


def write_polyline_csv(curve: Curve, path, n: int = GEOMETRY_GRID) -> None:
    np.savetxt(path, curve.polyline(n), delimiter=",", header="t,x,y", comments="", fmt="%.17g")


def read_polyline_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1)
