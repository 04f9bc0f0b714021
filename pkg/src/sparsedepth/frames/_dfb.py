"""Tree-structured directional filter bank (DFB).

Decomposes an image into 2^n directional subbands by cascading two-channel
quincunx fan filter banks.  With orthogonal prototype filters the whole
analysis operator is unitary, so the reconstruction implemented here is
simultaneously the inverse and the adjoint.
"""

import numpy as np

from ..errors import ShapeError
from ._filters import diamond_filters, fan_filters, modulate2
from ._resample import efilter2, efilter2_pair, inv_resamp_type, qdown, qup, resamp

__all__ = ["dfb_analysis", "dfb_synthesis"]

_PQ_TYPES = ("1r", "2r", "2c", "1c")


def _fb_split(x, h0, h1, type1, type2, extmod):
    """One two-channel analysis stage: filter then quincunx-downsample."""
    if type1 == "pq":
        x = resamp(x, type2)
    if h1.shape[0] % 2 and h1.shape[1] % 2:
        shift = (-1, 0)
        y0 = efilter2(x, h0, extmod)
        y1 = efilter2(x, h1, extmod, shift)
    else:
        y0, y1 = efilter2_pair(x, h0, h1, extmod)
    if type1 == "q":
        return qdown(y0, type2), qdown(y1, type2)
    if type1 == "pq":
        return qdown(y0, _PQ_TYPES[type2]), qdown(y1, _PQ_TYPES[type2])
    raise ValueError(f"unknown filter-bank type {type1!r}")


def _fb_merge(y0, y1, h0, h1, type1, type2, extmod):
    """One two-channel synthesis stage: quincunx-upsample then filter."""
    if type1 == "q":
        y0 = qup(y0, type2)
        y1 = qup(y1, type2)
    elif type1 == "pq":
        y0 = qup(y0, _PQ_TYPES[type2])
        y1 = qup(y1, _PQ_TYPES[type2])
    else:
        raise ValueError(f"unknown filter-bank type {type1!r}")
    if h1.shape[0] % 2 and h1.shape[1] % 2:
        shift = (1, 0)
    else:
        shift = (0, 0)
    # Even-length filter axes need a one-sample origin adjustment for
    # zero-shift perfect reconstruction.
    adj0 = ((h0.shape[0] + 1) % 2, (h0.shape[1] + 1) % 2)
    adj1 = ((h1.shape[0] + 1) % 2 + shift[0], (h1.shape[1] + 1) % 2 + shift[1])
    x = efilter2(y0, h0, extmod, adj0) + efilter2(y1, h1, extmod, adj1)
    if type1 == "pq":
        x = resamp(x, inv_resamp_type[type2])
    return x


def _backsamp(y):
    """Shear subbands so the overall sampling of each is separable."""
    n = int(np.log2(len(y)))
    if n == 1:
        for k in range(2):
            y[k] = resamp(y[k], 3)
            y[k][:, 0::2] = resamp(y[k][:, 0::2], 0)
            y[k][:, 1::2] = resamp(y[k][:, 1::2], 0)
    elif n > 2:
        half = 2 ** (n - 1)
        for k in range(2 ** (n - 2)):
            shift = 2 * (k + 1) - (2 ** (n - 2) + 1)
            for j in (2 * k, 2 * k + 1):
                y[j] = resamp(y[j], 2, shift)
                y[j + half] = resamp(y[j + half], 0, shift)
    return y


def _unbacksamp(y):
    """Exact inverse of _backsamp."""
    n = int(np.log2(len(y)))
    if n == 1:
        for k in range(2):
            y[k][:, 0::2] = resamp(y[k][:, 0::2], 1)
            y[k][:, 1::2] = resamp(y[k][:, 1::2], 1)
            y[k] = resamp(y[k], 2)
    elif n > 2:
        half = 2 ** (n - 1)
        for k in range(2 ** (n - 2)):
            shift = 2 * (k + 1) - (2 ** (n - 2) + 1)
            for j in (2 * k, 2 * k + 1):
                y[j] = resamp(y[j], 2, -shift)
                y[j + half] = resamp(y[j + half], 0, -shift)
    return y


def _check_input(shape, levels):
    need = 1 << max(levels, 2)
    if shape[0] % need or shape[1] % need:
        raise ShapeError(
            f"directional decomposition with {levels} levels needs sides "
            f"divisible by {need}, got {shape}"
        )


def _analysis_filters(fname):
    """Fan filters for levels 1-2 (k0, k1) and the deeper tree (f0, f1)."""
    h0, h1 = diamond_filters(fname, "d")
    k0 = modulate2(h0, "c")
    k1 = modulate2(h1, "c")
    f0, f1 = fan_filters(h0, h1)
    return k0, k1, f0, f1


def _synthesis_filters(fname):
    """Reversed analysis filters: the exact adjoint of the analysis bank.

    Reversing after modulation matters: modulating a reversed even-length
    filter would flip its sign and make some stages the negative adjoint.
    """
    k0, k1, f0, f1 = _analysis_filters(fname)
    rev = lambda f: f[::-1, ::-1]
    return rev(k0), rev(k1), [rev(f) for f in f0], [rev(f) for f in f1]


def dfb_analysis(x: np.ndarray, levels: int, fname: str = "ko") -> list[np.ndarray]:
    """Split x into 2^levels directional subbands (levels >= 1)."""
    if levels < 1:
        return [x.copy()]
    _check_input(x.shape, levels)
    k0, k1, f0, f1 = _analysis_filters(fname)
    if levels == 1:
        y = list(_fb_split(x, k0, k1, "q", "1r", "per"))
    else:
        x0, x1 = _fb_split(x, k0, k1, "q", "1r", "per")
        y = [None] * 4
        y[0], y[1] = _fb_split(x0, k0, k1, "q", "2c", "qper_col")
        y[2], y[3] = _fb_split(x1, k0, k1, "q", "2c", "qper_col")
        for lvl in range(3, levels + 1):
            y_old = y
            y = [None] * (1 << lvl)
            for k in range(1 << (lvl - 1)):
                i = k % 2 if k < (1 << (lvl - 2)) else k % 2 + 2
                y[2 * k], y[2 * k + 1] = _fb_split(y_old[k], f0[i], f1[i],
                                                   "pq", i, "per")
    y = _backsamp(y)
    half = 1 << (levels - 1)
    y[half:] = y[::-1][:half]
    return y


def dfb_synthesis(y: list[np.ndarray], fname: str = "ko") -> np.ndarray:
    """Inverse (and adjoint) of dfb_analysis."""
    levels = int(np.log2(len(y)))
    if len(y) != 1 << levels:
        raise ShapeError(f"subband count must be a power of two, got {len(y)}")
    if levels == 0:
        return y[0].copy()
    y = [band.copy() for band in y]
    half = 1 << (levels - 1)
    y[half:] = y[::-1][:half]
    y = _unbacksamp(y)
    k0, k1, f0, f1 = _synthesis_filters(fname)
    if levels == 1:
        return _fb_merge(y[0], y[1], k0, k1, "q", "1r", "per")
    for lvl in range(levels, 2, -1):
        y_old = y
        y = [None] * (1 << (lvl - 1))
        for k in range(1 << (lvl - 1)):
            i = k % 2 if k < (1 << (lvl - 2)) else k % 2 + 2
            y[k] = _fb_merge(y_old[2 * k], y_old[2 * k + 1], f0[i], f1[i],
                             "pq", i, "per")
    x0 = _fb_merge(y[0], y[1], k0, k1, "q", "2c", "qper_col")
    x1 = _fb_merge(y[2], y[3], k0, k1, "q", "2c", "qper_col")
    return _fb_merge(x0, x1, k0, k1, "q", "1r", "per")
