"""Integer-order cylinder functions for real arguments.

Thin validated layer over :mod:`scipy.special`. Kernels that may see a
complex interior wavenumber (absorbing transmission media) call scipy
directly, since complex arguments are outside this module's domain.
"""

from __future__ import annotations

import numpy as np
from scipy import special

MAX_ORDER = 200


def _check_order(n) -> None:
    n_arr = np.asarray(n)
    if not np.issubdtype(n_arr.dtype, np.integer):
        if np.any(n_arr != np.round(n_arr)):
            raise ValueError("order must be an integer")
    if np.any(np.abs(n_arr) > MAX_ORDER):
        raise ValueError(f"|order| exceeds {MAX_ORDER}")


def _as_real(x, *, allow_zero: bool) -> np.ndarray:
    x_arr = np.asarray(x, dtype=float)
    if allow_zero:
        if np.any(x_arr < 0):
            raise ValueError("argument must be non-negative")
    elif np.any(x_arr <= 0):
        raise ValueError("argument must be positive")
    return x_arr


def _out(v):
    return v.item() if np.ndim(v) == 0 else v


def bessel_j(n, x):
    """Bessel function of the first kind J_n(x), x >= 0."""
    _check_order(n)
    return _out(special.jv(n, _as_real(x, allow_zero=True)))


def bessel_y(n, x):
    """Bessel function of the second kind Y_n(x), x > 0."""
    _check_order(n)
    return _out(special.yv(n, _as_real(x, allow_zero=False)))


def hankel1(n, x):
    """Hankel function of the first kind H_n^(1)(x) = J_n(x) + i Y_n(x)."""
    _check_order(n)
    return _out(special.hankel1(n, _as_real(x, allow_zero=False)))


def bessel_j_derivative(n, x):
    """d/dx J_n(x)."""
    _check_order(n)
    return _out(special.jvp(n, _as_real(x, allow_zero=True)))


def bessel_y_derivative(n, x):
    """d/dx Y_n(x)."""
    _check_order(n)
    return _out(special.yvp(n, _as_real(x, allow_zero=False)))


def hankel1_derivative(n, x):
    """d/dx H_n^(1)(x)."""
    _check_order(n)
    return _out(special.h1vp(n, _as_real(x, allow_zero=False)))
