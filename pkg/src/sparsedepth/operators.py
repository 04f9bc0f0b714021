"""FFT helpers and the periodic first-order finite-difference operator.

The difference operator D stacks horizontal and vertical forward
differences with periodic wrap-around, so D^T D is circulant and its
spectrum diagonalizes under the 2-D DFT.  That spectrum is what the
reconstruction solver divides by in its frequency-domain step.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

__all__ = ["fft2", "ifft2", "apply_diff", "diff_adjoint", "DiffOperator"]


def fft2(x: np.ndarray) -> np.ndarray:
    """2-D DFT (unnormalized forward transform)."""
    return scipy.fft.fft2(x)


def ifft2(x: np.ndarray) -> np.ndarray:
    """Inverse 2-D DFT."""
    return scipy.fft.ifft2(x)


def apply_diff(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences (dx horizontal, dy vertical), periodic wrap."""
    dx = np.roll(x, -1, axis=1) - x
    dy = np.roll(x, -1, axis=0) - x
    return dx, dy


def diff_adjoint(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Adjoint of apply_diff: negative backward differences, summed."""
    return (np.roll(dx, 1, axis=1) - dx) + (np.roll(dy, 1, axis=0) - dy)


@dataclass(frozen=True)
class DiffOperator:
    """Periodic difference operator for a fixed grid shape.

    ``spectrum`` holds the eigenvalues of D^T D under the 2-D DFT:
    4 sin^2(pi k1 / H) + 4 sin^2(pi k2 / W).  The DC entry is zero.
    """

    shape: tuple[int, int]
    spectrum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h, w = self.shape
        wy = 4.0 * np.sin(np.pi * np.arange(h) / h) ** 2
        wx = 4.0 * np.sin(np.pi * np.arange(w) / w) ** 2
        object.__setattr__(self, "spectrum", wy[:, None] + wx[None, :])

    def apply(self, x):
        return apply_diff(x)

    def adjoint(self, dx, dy):
        return diff_adjoint(dx, dy)

    def gram_apply(self, x: np.ndarray) -> np.ndarray:
        """D^T D x via the FFT spectrum."""
        return ifft2(self.spectrum * fft2(x)).real
