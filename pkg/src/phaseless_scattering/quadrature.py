"""Trigonometric quadrature and differentiation on 2n equispaced nodes."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def nodes(n: int) -> np.ndarray:
    """``t_j = pi j / n`` for ``j = 0..2n-1``."""
    return np.pi * np.arange(2 * n) / n


def _circulant(col: np.ndarray) -> np.ndarray:
    N = col.size
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    return col[idx]


@lru_cache(maxsize=16)
def log_weights(n: int) -> np.ndarray:
    """Weights R_ij for ``int ln(4 sin^2((t_i - tau)/2)) f(tau) dtau``.

    Exact for trigonometric polynomials of degree < n plus the cosine
    Nyquist mode, hence spectrally accurate for analytic ``f``.
    """
    s = nodes(n)
    m = np.arange(1, n)
    col = -(2 * np.pi / n) * (np.cos(np.outer(s, m)) / m).sum(-1) - (np.pi / n**2) * np.cos(n * s)
    out = _circulant(col)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def log_kernel(n: int) -> np.ndarray:
    """``ln(4 sin^2((t_i - t_j)/2))`` off the diagonal, zero on it."""
    s = nodes(n)
    col = np.zeros(2 * n)
    col[1:] = np.log(4 * np.sin(s[1:] / 2) ** 2)
    out = _circulant(col)
    out.setflags(write=False)
    return out


def _fourier_multiplier(n: int, symbol) -> np.ndarray:
    N = 2 * n
    m = np.fft.fftfreq(N, d=1.0 / N)
    col = np.fft.ifft(symbol(m) * np.fft.fft(np.eye(N)[:, 0]))
    return _circulant(np.real(col))


@lru_cache(maxsize=16)
def diff_matrix(n: int) -> np.ndarray:
    """Spectral derivative of the trigonometric interpolant (Nyquist mode dropped)."""

    def symbol(m):
        out = 1j * m
        out[np.abs(m) == n] = 0.0
        return out

    out = _fourier_multiplier(n, symbol)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def abs_derivative_matrix(n: int) -> np.ndarray:
    """Fourier multiplier ``e^{imt} -> -|m| e^{imt}``.

    This is ``d/dt int -(1/2pi) ln(4 sin^2((t-tau)/2)) f'(tau) dtau``, the
    principal part of the hypersingular operator.
    """
    out = _fourier_multiplier(n, lambda m: -np.abs(m).astype(complex))
    out.setflags(write=False)
    return out


def differentiate(values: np.ndarray) -> np.ndarray:
    """Spectral derivative of periodic samples along axis 0."""
    N = values.shape[0]
    m = np.fft.fftfreq(N, d=1.0 / N)
    mult = 1j * m
    if N % 2 == 0:
        mult[N // 2] = 0.0
    shape = (N,) + (1,) * (values.ndim - 1)
    out = np.fft.ifft(mult.reshape(shape) * np.fft.fft(values, axis=0), axis=0)
    return out if np.iscomplexobj(values) else out.real
