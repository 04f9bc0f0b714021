"""Interpolation baselines for comparing against the regularized solver."""

import numpy as np
from scipy.interpolate import LinearNDInterpolator, NearestNDInterpolator

from ..errors import ParameterError
from ..raster import Observation

__all__ = ["bilinear_baseline"]


def bilinear_baseline(obs: Observation) -> np.ndarray:
    """Piecewise-linear interpolation of the observed samples.

    Triangulates the sampled locations and interpolates linearly inside
    the convex hull; outside it (image borders beyond the outermost
    samples) the nearest sample is used.  On a regular sampling grid this
    reduces to bilinear interpolation.
    """
    mask = np.asarray(obs.mask, dtype=bool)
    if mask.sum() < 3:
        raise ParameterError("baseline interpolation needs at least 3 samples")
    rows, cols = np.nonzero(mask)
    pts = np.column_stack([rows, cols]).astype(np.float64)
    vals = np.asarray(obs.values, dtype=np.float64)[mask]
    yy, xx = np.mgrid[0:mask.shape[0], 0:mask.shape[1]]
    query = np.column_stack([yy.ravel(), xx.ravel()]).astype(np.float64)
    out = LinearNDInterpolator(pts, vals)(query)
    holes = np.isnan(out)
    if holes.any():
        out[holes] = NearestNDInterpolator(pts, vals)(query[holes])
    return np.clip(out.reshape(mask.shape), 0.0, 1.0)
