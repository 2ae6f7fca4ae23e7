"""Intensity data, the multiplicative noise model, and translation probes."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .conditions import BoundaryCondition
from .forward import FarFieldPattern, NystromSolver, farfield_grid
from .geometry import Curve
from .incident import PlaneWaveSuperposition


def intensity(f: FarFieldPattern | np.ndarray) -> np.ndarray:
    """Pointwise ``|u_inf|^2``."""
    samples = f.samples if isinstance(f, FarFieldPattern) else np.asarray(f)
    return samples.real**2 + samples.imag**2


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def clipped_normal(rng, size) -> np.ndarray:
    """Standard normal draws restricted to [-1, 1] by resampling."""
    rng = _generator(rng)
    out = rng.standard_normal(size)
    bad = np.abs(out) > 1
    while bad.any():
        out[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(out) > 1
    return out


def add_noise(data: np.ndarray, delta: float, rng=None) -> np.ndarray:
    """``data * (1 + delta * zeta)`` with independent clipped-normal ``zeta``.

    ``rng`` is a seed or a ``numpy.random.Generator``; a generator is
    advanced in place, so threading it through successive calls gives
    independent draws.
    """
    if not 0 <= delta < 1:
        raise ValueError("noise ratio must satisfy 0 <= delta < 1")
    data = np.asarray(data, dtype=float)
    if delta == 0:
        return data.copy()
    return data * (1 + delta * clipped_normal(rng, data.shape))


def l2_norm(g: np.ndarray, axis=-1) -> np.ndarray:
    """Discrete ``L^2(S^1)`` norm ``sqrt(2 pi / n_f * sum |g_j|^2)``."""
    g = np.asarray(g)
    n_f = g.shape[axis]
    return np.sqrt(2 * np.pi / n_f * (np.abs(g) ** 2).sum(axis=axis))


@dataclass(eq=False)
class PhaselessDataset:
    """Intensities indexed by (direction pair l, frequency m, sample j).

    ``pairs_deg`` holds the incident angles in degrees, one row per pair
    (a single angle for plane-wave incidence).
    """

    intensities: np.ndarray
    ks: np.ndarray
    pairs_deg: list
    delta: float = 0.0
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.intensities = np.asarray(self.intensities, dtype=float)
        self.ks = np.asarray(self.ks, dtype=float)
        self.pairs_deg = [list(map(float, np.atleast_1d(p))) for p in self.pairs_deg]
        if np.any(np.diff(self.ks) <= 0):
            raise ValueError("wavenumbers must be strictly increasing")
        n_d, N = len(self.pairs_deg), len(self.ks)
        if self.intensities.ndim != 3 or self.intensities.shape[:2] != (n_d, N):
            raise ValueError(f"intensity array must have shape ({n_d}, {N}, n_f)")

    @property
    def n_f(self) -> int:
        return self.intensities.shape[2]

    @property
    def n_d(self) -> int:
        return len(self.pairs_deg)

    def incident(self, l: int, k: float) -> PlaneWaveSuperposition:
        return PlaneWaveSuperposition.from_angles(k, self.pairs_deg[l], degrees=True)

    def incidences(self, k: float) -> list[PlaneWaveSuperposition]:
        return [self.incident(l, k) for l in range(self.n_d)]

    def slice(self, m: int) -> np.ndarray:
        """Data at the m-th frequency, shape ``(n_d, n_f)``."""
        return self.intensities[:, m, :]

    def header(self) -> dict:
        return {
            "delta": self.delta,
            "seed": self.seed,
            "nf": self.n_f,
            "pairs": [{"angles_deg": p} for p in self.pairs_deg],
            "ks": self.ks.tolist(),
            **({"meta": self.meta} if self.meta else {}),
        }

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        buf.write("l,m,j,intensity\n")
        n_d, N, n_f = self.intensities.shape
        for l in range(n_d):
            for m in range(N):
                for j in range(n_f):
                    buf.write(f"{l + 1},{m + 1},{j + 1},{float(self.intensities[l, m, j])!r}\n")
        return buf.getvalue()

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> PhaselessDataset:
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# "):
            raise ValueError("dataset file lacks its JSON header line")
        head = json.loads(lines[0][2:])
        if lines[1].strip() != "l,m,j,intensity":
            raise ValueError("unexpected dataset column header")
        pairs = [p["angles_deg"] for p in head["pairs"]]
        ks = head["ks"]
        arr = np.full((len(pairs), len(ks), head["nf"]), np.nan)
        for row in lines[2:]:
            if not row.strip():
                continue
            l, m, j, val = row.split(",")
            arr[int(l) - 1, int(m) - 1, int(j) - 1] = float(val)
        if np.isnan(arr).any():
            raise ValueError("dataset file is missing samples")
        return cls(arr, ks, pairs, head["delta"], head["seed"], head.get("meta", {}))

    @classmethod
    def read(cls, path) -> PhaselessDataset:
        with open(path) as fh:
            return cls.loads(fh.read())


def synthesize(
    curve: Curve,
    bc: BoundaryCondition,
    pairs_deg,
    ks,
    n_f: int = 128,
    delta: float = 0.0,
    seed: int | None = None,
    n_q: int = 128,
) -> PhaselessDataset:
    """Noisy phaseless data from forward solves on ``curve``.

    One assembly per wavenumber serves all direction pairs. Noise is drawn
    per sample from one generator seeded with ``seed``, in (l, m, j) order.
    """
    ks = np.asarray(ks, dtype=float)
    pairs_deg = [list(np.atleast_1d(p).astype(float)) for p in pairs_deg]
    clean = np.empty((len(pairs_deg), len(ks), n_f))
    for m, k in enumerate(ks):
        solver = NystromSolver(curve, bc, k, n_q)
        for l, p in enumerate(pairs_deg):
            w = PlaneWaveSuperposition.from_angles(k, p, degrees=True)
            clean[l, m] = intensity(solver.solve(w, n_f))
    noisy = add_noise(clean, delta, np.random.default_rng(seed))
    return PhaselessDataset(noisy, ks, pairs_deg, delta, seed)


@dataclass(frozen=True, eq=False)
class TranslationOffset:
    """Shift ``l = a n + [(2 pi n_idx + tau) / (k |d1-d2|^2)] (d1 - d2)``."""

    base_direction: np.ndarray
    index: int
    a: float
    tau: float
    shift: np.ndarray


def bisector_normal(d1, d2) -> np.ndarray:
    """Unit vector with equal projections on ``d1`` and ``d2``.

    Chosen as the counter-clockwise rotation of ``(d1 - d2)/|d1 - d2|``.
    """
    diff = np.asarray(d1, dtype=float) - np.asarray(d2, dtype=float)
    norm = np.hypot(*diff)
    if norm < 1e-12:
        raise ValueError("degenerate directions: d1 == d2")
    u = diff / norm
    return np.array([-u[1], u[0]])


def invariance_offset(d1, d2, k: float, n: int, a: float, tau: float = 0.0) -> TranslationOffset:
    """Lattice shift under which the two-wave phaseless far field is unchanged."""
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    nb = bisector_normal(d1, d2)
    diff = d1 - d2
    shift = a * nb + (2 * np.pi * n + tau) / (k * (diff @ diff)) * diff
    return TranslationOffset(nb, int(n), float(a), float(tau), shift)


def check_invariance(
    curve: Curve,
    bc: BoundaryCondition,
    d1,
    d2,
    k: float,
    shift,
    n_f: int = 128,
    n_q: int = 64,
) -> float:
    """``max_j | |u_inf_shift(x_j)| - |u_inf(x_j)| |`` for the shifted obstacle.

    ``d2=None`` uses single plane-wave incidence along ``d1``.
    """
    dirs = [d1] if d2 is None else [d1, d2]
    w = PlaneWaveSuperposition(k, dirs)
    u = NystromSolver(curve, bc, k, n_q).solve(w, n_f).samples
    us = NystromSolver(curve.translated(shift), bc, k, n_q).solve(w, n_f).samples
    return float(np.abs(np.abs(us) - np.abs(u)).max())


def translation_phase(k: float, d, shift, n_f: int) -> np.ndarray:
    """``exp(i k l . (d - xhat))`` on the far-field grid."""
    th = farfield_grid(n_f)
    xhat = np.column_stack([np.cos(th), np.sin(th)])
    return np.exp(1j * k * ((np.asarray(d, dtype=float)[None, :] - xhat) @ np.asarray(shift, dtype=float)))
