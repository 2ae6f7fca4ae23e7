"""Boundary conditions on the obstacle boundary."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Dirichlet:
    """Sound-soft obstacle: ``u = 0`` on the boundary."""

    name = "dirichlet"


@dataclass(frozen=True)
class Neumann:
    """Sound-hard obstacle: ``du/dnu = 0`` on the boundary."""

    name = "neumann"


@dataclass(frozen=True)
class Impedance:
    """``du/dnu + mu u = 0`` with a real constant impedance ``mu``."""

    mu: float
    name = "impedance"


@dataclass(frozen=True)
class Transmission:
    """Penetrable obstacle with refractive index ``n`` and transmission constant ``lam``.

    Interface conditions: ``u+ = u-`` and ``du+/dnu = lam du-/dnu`` for the
    total fields; the interior wavenumber is ``k sqrt(n)``.
    """

    n: complex
    lam: float
    name = "transmission"

    def __post_init__(self):
        n = complex(self.n)
        if n.real <= 0 or n.imag < 0:
            raise ValueError("refractive index needs Re(n) > 0 and Im(n) >= 0")
        if self.lam <= 0:
            raise ValueError("transmission constant must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "lam", float(self.lam))


BoundaryCondition = Dirichlet | Neumann | Impedance | Transmission


def to_json(bc: BoundaryCondition) -> dict:
    out = {"kind": bc.name}
    if isinstance(bc, Impedance):
        out["mu"] = bc.mu
    elif isinstance(bc, Transmission):
        out["n"] = [bc.n.real, bc.n.imag]
        out["lam"] = bc.lam
    return out


def from_json(obj: dict) -> BoundaryCondition:
    kind = obj["kind"]
    if kind == "dirichlet":
        return Dirichlet()
    if kind == "neumann":
        return Neumann()
    if kind == "impedance":
        return Impedance(float(obj["mu"]))
    if kind == "transmission":
        n = obj["n"]
        n = complex(n[0], n[1]) if isinstance(n, (list, tuple)) else complex(n)
        return Transmission(n, float(obj["lam"]))
    raise ValueError(f"unknown boundary condition {kind!r}")
