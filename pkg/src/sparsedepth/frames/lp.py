"""Tight Laplacian pyramid.

One pyramid stage maps x to (c, d) with c = L x (lowpass + 2x2
downsample) and d = (I - L^T L) x.  Because the separable lowpass has
orthonormal even shifts, L L^T = I and the stacked operator [L; I - L^T L]
satisfies A^T A = I: the pyramid is a Parseval tight frame and synthesis
is simply the adjoint x = L^T c + (I - L^T L) d.
"""

import numpy as np

from ..errors import ShapeError
from ._sepconv import sep_low, sep_low_adjoint
from .wavelet import DB2_LOWPASS

__all__ = ["lp_split", "lp_merge"]


def lp_split(x: np.ndarray, h: np.ndarray = DB2_LOWPASS) -> tuple[np.ndarray, np.ndarray]:
    """Split into a half-size coarse band c and a full-size detail band d."""
    if x.shape[0] % 2 or x.shape[1] % 2:
        raise ShapeError(f"pyramid stage needs even sides, got {x.shape}")
    c = sep_low(x, h)
    d = x - sep_low_adjoint(c, h)
    return c, d


def lp_merge(c: np.ndarray, d: np.ndarray, h: np.ndarray = DB2_LOWPASS) -> np.ndarray:
    """Adjoint (and exact inverse) of lp_split."""
    return sep_low_adjoint(c - sep_low(d, h), h) + d
