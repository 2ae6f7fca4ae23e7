"""Geometric error measures between a reconstruction and a reference curve."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .geometry import Curve, RadialCurve

DENSE = 2048


def _samples(curve: Curve, n: int = DENSE) -> np.ndarray:
    return curve.point(2 * np.pi * np.arange(n) / n)


def area_centroid(curve: Curve, n: int = DENSE) -> np.ndarray:
    """Centroid of the enclosed region (shoelace formula on a dense polygon)."""
    p = _samples(curve, n)
    q = np.roll(p, -1, axis=0)
    cross = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
    area = cross.sum() / 2
    return ((p + q) * cross[:, None]).sum(0) / (6 * area)


def reference_point(curve: Curve) -> np.ndarray:
    """Center of a radially parametrized curve, else its area centroid."""
    if isinstance(curve, RadialCurve):
        return np.asarray(curve.center, dtype=float)
    return area_centroid(curve)


def ray_radius(curve: Curve, origin, angles: np.ndarray, n: int = DENSE) -> np.ndarray:
    """Distance from ``origin`` to the curve along each ray.

    Uses the farthest crossing with the polygon; ``nan`` marks rays that
    miss the curve.
    """
    p = _samples(curve, n) - np.asarray(origin, dtype=float)
    e = p[np.r_[1:n, 0]] - p
    u = np.column_stack([np.cos(angles), np.sin(angles)])
    # solve s u = p_i + tau e_i  for (s, tau)
    det = u[:, None, 0] * (-e[None, :, 1]) - u[:, None, 1] * (-e[None, :, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (p[None, :, 0] * (-e[None, :, 1]) + p[None, :, 1] * e[None, :, 0]) / det
        tau = (u[:, None, 0] * p[None, :, 1] - u[:, None, 1] * p[None, :, 0]) / det
    hit = (tau >= -1e-12) & (tau <= 1 + 1e-12) & (s >= 0) & np.isfinite(s)
    s = np.where(hit, s, -np.inf)
    out = s.max(axis=1)
    return np.where(np.isfinite(out), out, np.nan)


def radial_relative_error(recon: Curve, truth: Curve, n: int = 512) -> float:
    """``||r_rec - r_true||_{L^2} / ||r_true||_{L^2}`` along rays from the true center."""
    origin = reference_point(truth)
    angles = 2 * np.pi * np.arange(n) / n
    r_true = ray_radius(truth, origin, angles)
    r_rec = ray_radius(recon, origin, angles)
    if np.isnan(r_rec).any():
        return float("inf")
    return float(np.linalg.norm(r_rec - r_true) / np.linalg.norm(r_true))


def center_error(recon: Curve, truth: Curve) -> float:
    """Distance between area centroids."""
    return float(np.linalg.norm(area_centroid(recon) - area_centroid(truth)))


def hausdorff_distance(a: Curve, b: Curve, n: int = DENSE) -> float:
    pa, pb = _samples(a, n), _samples(b, n)
    return float(max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0]))


def aligned_shape_error(a: Curve, b: Curve, n: int = 512) -> float:
    """Radial relative error of ``a`` against ``b`` after matching centroids.

    Measures agreement of shape independent of location.
    """
    shifted = a.translated(area_centroid(b) - area_centroid(a))
    origin = area_centroid(b)
    angles = 2 * np.pi * np.arange(n) / n
    ra = ray_radius(shifted, origin, angles)
    rb = ray_radius(b, origin, angles)
    return float(np.linalg.norm(ra - rb) / np.linalg.norm(rb))

