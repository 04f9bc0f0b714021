"""Orthogonal diamond/fan filter pairs for the directional filter bank.

The two-channel prototype is a pair of orthogonal diamond-shaped filters;
fan filters are obtained by modulating one frequency axis, and the four
parallelogram variants used deeper in the tree come from modulation plus
transposition.  Because the prototypes are orthogonal, the reconstruction
filters are just the reversed analysis filters and the overall bank is
unitary.
"""

import numpy as np

__all__ = ["modulate2", "diamond_filters", "fan_filters"]


def modulate2(x: np.ndarray, axis: str, center: tuple[int, int] = (0, 0)) -> np.ndarray:
    """Multiply by (-1)^n along rows ('r'), columns ('c'), or both ('b').

    The modulation origin is floor(shape/2) + center.
    """
    o0 = x.shape[0] // 2 + center[0]
    o1 = x.shape[1] // 2 + center[1]
    m1 = (-1.0) ** (np.arange(x.shape[0]) - o0)
    m2 = (-1.0) ** (np.arange(x.shape[1]) - o1)
    if axis == "r":
        return x * m1[:, None]
    if axis == "c":
        return x * m2[None, :]
    if axis == "b":
        return x * np.outer(m1, m2)
    raise ValueError(f"unknown modulation axis {axis!r}")


def _ko_pair(a0: float, a1: float, a2: float) -> tuple[np.ndarray, np.ndarray]:
    h0 = np.array([
        [0.0, -a1, -a0 * a1, 0.0],
        [-a2, -a0 * a2, -a0, 1.0],
        [0.0, a0 * a1 * a2, -a1 * a2, 0.0],
    ])
    h1 = np.array([
        [0.0, -a1 * a2, -a0 * a1 * a2, 0.0],
        [1.0, a0, -a0 * a2, a2],
        [0.0, -a0 * a1, a1, 0.0],
    ])
    norm = np.sqrt(2.0) / h0.sum()
    return h0 * norm, h1 * norm


def diamond_filters(name: str, side: str) -> tuple[np.ndarray, np.ndarray]:
    """Return the (h0, h1) diamond pair for analysis ('d') or synthesis ('r').

    Names: ``ko`` (orthogonal lattice pair) and ``kos`` (smoother
    orthogonal variant).  Synthesis filters are the reversed analysis
    filters, which is exact for orthogonal pairs.
    """
    if name == "ko":
        h0, h1 = _ko_pair(2.0, 0.5, 1.0)
    elif name == "kos":
        s3 = np.sqrt(3.0)
        h0, h1 = _ko_pair(-s3, -s3, 2.0 + s3)
    else:
        raise ValueError(f"unknown directional filter name {name!r}")
    if side == "r":
        h0 = h0[::-1, ::-1]
        h1 = h1[::-1, ::-1]
    elif side != "d":
        raise ValueError(f"filter side must be 'd' or 'r', got {side!r}")
    return h0, h1


def fan_filters(h0: np.ndarray, h1: np.ndarray):
    """Four fan-filter pairs from a diamond pair: modulations and transposes."""
    f0 = [modulate2(h0, "r"), modulate2(h0, "c")]
    f1 = [modulate2(h1, "r"), modulate2(h1, "c")]
    f0 += [f0[0].T, f0[1].T]
    f1 += [f1[0].T, f1[1].T]
    return f0, f1
