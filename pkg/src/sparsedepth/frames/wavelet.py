"""Orthonormal separable 2-D wavelet transform (periodized, 4-tap kernel).

The analysis operator has orthonormal rows, so synthesis is both the
adjoint and the exact inverse.  Coefficients are organized as one lowpass
band at the coarsest level plus three oriented detail bands per level.
"""

import numpy as np

from ..errors import ShapeError
from ._sepconv import filt_down, filt_down_adjoint

__all__ = ["DB2_LOWPASS", "DB2_HIGHPASS", "wavelet_analysis", "wavelet_synthesis"]

_SQRT3 = np.sqrt(3.0)
DB2_LOWPASS = np.array([1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3])
DB2_LOWPASS /= 4.0 * np.sqrt(2.0)
# Quadrature-mirror highpass: g[k] = (-1)^k h[L-1-k].
DB2_HIGHPASS = DB2_LOWPASS[::-1] * np.array([1.0, -1.0, 1.0, -1.0])


def _check_shape(shape: tuple[int, int], levels: int) -> None:
    for n in shape:
        if n % (1 << levels):
            raise ShapeError(
                f"wavelet transform with {levels} levels needs sides divisible "
                f"by {1 << levels}, got {shape}"
            )


def wavelet_analysis(x: np.ndarray, levels: int = 2) -> list[np.ndarray]:
    """Decompose x into [lowpass, (LH, HL, HH) coarse ... fine] bands.

    LH carries horizontal detail (highpass along columns), HL vertical
    detail, HH diagonal.
    """
    _check_shape(x.shape, levels)
    h, g = DB2_LOWPASS, DB2_HIGHPASS
    details = []
    cur = x
    for _ in range(levels):
        lo = filt_down(cur, h, 0)
        hi = filt_down(cur, g, 0)
        ll = filt_down(lo, h, 1)
        lh = filt_down(lo, g, 1)
        hl = filt_down(hi, h, 1)
        hh = filt_down(hi, g, 1)
        details.append((lh, hl, hh))
        cur = ll
    bands = [cur]
    for lh, hl, hh in reversed(details):
        bands.extend((lh, hl, hh))
    return bands


def wavelet_synthesis(bands: list[np.ndarray], levels: int = 2) -> np.ndarray:
    """Adjoint (and inverse) of wavelet_analysis."""
    if len(bands) != 1 + 3 * levels:
        raise ShapeError(f"expected {1 + 3 * levels} bands, got {len(bands)}")
    h, g = DB2_LOWPASS, DB2_HIGHPASS
    cur = bands[0]
    for lvl in range(levels):
        lh, hl, hh = bands[1 + 3 * lvl : 4 + 3 * lvl]
        lo = filt_down_adjoint(cur, h, 1) + filt_down_adjoint(lh, g, 1)
        hi = filt_down_adjoint(hl, h, 1) + filt_down_adjoint(hh, g, 1)
        cur = filt_down_adjoint(lo, h, 0) + filt_down_adjoint(hi, g, 0)
    return cur
