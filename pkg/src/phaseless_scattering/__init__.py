"""Phaseless inverse obstacle scattering with superposed plane waves.

Submodules are imported on first attribute access so that the command
line driver can set BLAS thread limits before numpy is loaded.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "Curve": "geometry",
    "StarlikeCurve": "geometry",
    "TrigPolynomial": "geometry",
    "benchmark": "geometry",
    "Dirichlet": "conditions",
    "Neumann": "conditions",
    "Impedance": "conditions",
    "Transmission": "conditions",
    "PlaneWaveSuperposition": "incident",
    "FarFieldPattern": "forward",
    "NystromSolver": "forward",
    "solve": "forward",
    "solve_exterior": "forward",
    "solve_transmission": "forward",
    "PhaselessDataset": "phaseless",
    "synthesize": "phaseless",
    "add_noise": "phaseless",
    "invariance_offset": "phaseless",
    "check_invariance": "phaseless",
    "linearize": "frechet",
    "derivative_farfield_dirichlet": "frechet",
    "derivative_farfield_neumann": "frechet",
    "derivative_farfield_transmission": "frechet",
    "IterateState": "inversion",
    "InversionConfig": "inversion",
    "reconstruct": "inversion",
    "series_farfield": "oracle",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    try:
        module = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}") from None
    return getattr(import_module(f".{module}", __name__), name)
