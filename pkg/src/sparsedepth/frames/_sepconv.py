"""Periodic separable filtering with exact adjoints.

These helpers implement filter-then-downsample along one axis and its
adjoint (upsample-then-correlate), both with periodic wrap.  They are the
building blocks of the orthonormal wavelet transform and the tight
Laplacian pyramid: when the 1-D filter has orthonormal even shifts, the
downsampling operator has orthonormal rows and the adjoint is a left
inverse.
"""

import numpy as np

__all__ = ["filt_down", "filt_down_adjoint", "sep_low", "sep_low_adjoint"]


def filt_down(x: np.ndarray, f: np.ndarray, axis: int) -> np.ndarray:
    """y[n] = sum_k f[k] x[(2n + k) mod N] along the given axis."""
    if x.shape[axis] % 2:
        raise ValueError("axis length must be even")
    x = np.moveaxis(x, axis, 0)
    out = np.zeros((x.shape[0] // 2,) + x.shape[1:])
    for k, fk in enumerate(f):
        out += fk * np.roll(x, -k, axis=0)[::2]
    return np.moveaxis(out, 0, axis)


def filt_down_adjoint(y: np.ndarray, f: np.ndarray, axis: int) -> np.ndarray:
    """Adjoint of filt_down: x[(2n + k) mod N] += f[k] y[n]."""
    y = np.moveaxis(y, axis, 0)
    n = y.shape[0] * 2
    out = np.zeros((n,) + y.shape[1:])
    up = np.zeros_like(out)
    for k, fk in enumerate(f):
        up[:] = 0.0
        up[::2] = fk * y
        out += np.roll(up, k, axis=0)
    return np.moveaxis(out, 0, axis)


def sep_low(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """2-D lowpass-and-downsample with the separable kernel h (x) h."""
    return filt_down(filt_down(x, h, 0), h, 1)


def sep_low_adjoint(c: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Adjoint of sep_low."""
    return filt_down_adjoint(filt_down_adjoint(c, h, 1), h, 0)
