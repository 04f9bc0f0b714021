"""Integer shearing, periodic extension, and quincunx up/down sampling.

These are the lattice operations underlying the directional filter bank.
All shears are unimodular and periodic, so each one is an exact
permutation of pixels with an exact inverse; the quincunx samplers are
built from Smith factorizations of the quincunx matrices into a shear and
a dyadic downsampling.
"""

import numpy as np

__all__ = [
    "resamp",
    "inv_resamp_type",
    "extend2",
    "efilter2",
    "qdown",
    "qup",
]

# resamp(x, t) is undone by resamp(x, inv_resamp_type[t]).
inv_resamp_type = (1, 0, 3, 2)


def resamp(x: np.ndarray, rtype: int, shift: int = 1) -> np.ndarray:
    """Periodic shear of a 2-D array.

    Type 0: y[i, j] = x[(i + s*j) mod m, j]      (shear rows down)
    Type 1: y[i, j] = x[(i - s*j) mod m, j]
    Type 2: y[i, j] = x[i, (j + s*i) mod n]      (shear columns right)
    Type 3: y[i, j] = x[i, (j - s*i) mod n]
    """
    if rtype in (2, 3):
        return np.ascontiguousarray(resamp(x.T, rtype - 2, shift).T)
    m, n = x.shape
    s = shift if rtype == 0 else -shift
    # Tile x vertically until every sheared row index is in range, then
    # read the shear as a strided view: element (i, j) sits at row i + s*j.
    smin = min(0, s * (n - 1))
    smax = max(0, s * (n - 1))
    base = ((-smin) + m - 1) // m * m if smin < 0 else 0
    reps = (base + m + smax + m - 1) // m
    xx = np.concatenate([x] * reps, axis=0) if reps > 1 else x
    st0, st1 = xx.strides
    view = np.lib.stride_tricks.as_strided(xx[base:], shape=(m, n),
                                           strides=(st0, st1 + s * st0))
    return view.copy()


def extend2(x: np.ndarray, ru: int, rd: int, cl: int, cr: int, mode: str) -> np.ndarray:
    """Extend a 2-D array by (ru, rd) rows and (cl, cr) columns.

    Modes: ``per`` is plain periodic; ``qper_row``/``qper_col`` are
    periodic on the quincunx lattice, i.e. the wrapped rows (columns) are
    shifted by half a period along the other axis.
    """
    rx, cx = x.shape
    ridx = np.arange(-ru, rx + rd) % rx
    cidx = np.arange(-cl, cx + cr) % cx
    if mode == "per":
        return x[ridx][:, cidx]
    if mode == "qper_row":
        left = np.r_[x[rx // 2 :, cx - cl : cx], x[: rx // 2, cx - cl : cx]]
        right = np.r_[x[rx // 2 :, :cr], x[: rx // 2, :cr]]
        y = np.c_[left, x, right]
        return y[ridx]
    if mode == "qper_col":
        cx2 = cx // 2
        top = np.c_[x[rx - ru : rx, cx2:], x[rx - ru : rx, :cx2]]
        bottom = np.c_[x[:rd, cx2:], x[:rd, :cx2]]
        y = np.r_[top, x, bottom]
        return y[:, cidx]
    raise ValueError(f"unknown extension mode {mode!r}")


def efilter2(x: np.ndarray, f: np.ndarray, extmod: str = "per",
             shift: tuple[int, int] = (0, 0)) -> np.ndarray:
    """2-D filtering with border extension; output has the shape of x.

    ``shift`` moves the filter origin (used to align even-length filters
    between the analysis and synthesis sides).
    """
    sf = (np.array(f.shape) - 1) / 2.0
    ru = int(np.floor(sf[0])) + shift[0]
    rd = int(np.ceil(sf[0])) - shift[0]
    cl = int(np.floor(sf[1])) + shift[1]
    cr = int(np.ceil(sf[1])) - shift[1]
    xe = extend2(x, ru, rd, cl, cr, extmod)
    return _conv_valid(xe, f)


def _conv_valid(xe: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Valid-mode 2-D convolution as shifted-slice accumulation.

    The filters here have at most a dozen taps (several zero), so a few
    vectorized adds beat both FFT and generic direct convolution.
    """
    fh, fw = f.shape
    oh = xe.shape[0] - fh + 1
    ow = xe.shape[1] - fw + 1
    out = np.zeros((oh, ow))
    for a in range(fh):
        for c in range(fw):
            fv = f[a, c]
            if fv != 0.0:
                out += fv * xe[fh - 1 - a : fh - 1 - a + oh,
                               fw - 1 - c : fw - 1 - c + ow]
    return out


def efilter2_pair(x: np.ndarray, f0: np.ndarray, f1: np.ndarray,
                  extmod: str = "per", shift: tuple[int, int] = (0, 0)):
    """Filter x with two same-shaped kernels sharing one border extension."""
    if f0.shape != f1.shape:
        return efilter2(x, f0, extmod, shift), efilter2(x, f1, extmod, shift)
    sf = (np.array(f0.shape) - 1) / 2.0
    ru = int(np.floor(sf[0])) + shift[0]
    rd = int(np.ceil(sf[0])) - shift[0]
    cl = int(np.floor(sf[1])) + shift[1]
    cr = int(np.ceil(sf[1])) - shift[1]
    xe = extend2(x, ru, rd, cl, cr, extmod)
    fh, fw = f0.shape
    oh = xe.shape[0] - fh + 1
    ow = xe.shape[1] - fw + 1
    out0 = np.zeros((oh, ow))
    out1 = np.zeros((oh, ow))
    for a in range(fh):
        for c in range(fw):
            v0 = f0[a, c]
            v1 = f1[a, c]
            if v0 == 0.0 and v1 == 0.0:
                continue
            sl = xe[fh - 1 - a : fh - 1 - a + oh, fw - 1 - c : fw - 1 - c + ow]
            if v0 != 0.0:
                out0 += v0 * sl
            if v1 != 0.0:
                out1 += v1 * sl
    return out0, out1


def qdown(x: np.ndarray, qtype: str) -> np.ndarray:
    """Quincunx downsampling via a shear + dyadic decimation."""
    if qtype == "1r":
        return resamp(resamp(x, 1)[::2], 2)
    if qtype == "1c":
        return resamp(resamp(x, 2)[:, ::2], 1)
    if qtype == "2r":
        return resamp(resamp(x, 0)[::2], 3)
    if qtype == "2c":
        return resamp(resamp(x, 3)[:, ::2], 0)
    raise ValueError(f"unknown quincunx type {qtype!r}")


def qup(x: np.ndarray, qtype: str) -> np.ndarray:
    """Quincunx upsampling; exact adjoint (and left inverse) of qdown."""
    if qtype == "1r":
        z = np.zeros((2 * x.shape[0], x.shape[1]))
        z[::2] = resamp(x, 3)
        return resamp(z, 0)
    if qtype == "1c":
        z = np.zeros((x.shape[0], 2 * x.shape[1]))
        z[:, ::2] = resamp(x, 0)
        return resamp(z, 3)
    if qtype == "2r":
        z = np.zeros((2 * x.shape[0], x.shape[1]))
        z[::2] = resamp(x, 2)
        return resamp(z, 1)
    if qtype == "2c":
        z = np.zeros((x.shape[0], 2 * x.shape[1]))
        z[:, ::2] = resamp(x, 1)
        return resamp(z, 2)
    raise ValueError(f"unknown quincunx type {qtype!r}")
