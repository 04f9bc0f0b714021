"""Sampling-pattern construction.

Patterns are either deterministic (uniform grid, greedy gradient
thresholding) or randomized: each pixel j is observed independently with
probability p_j, where mean(p) equals the target sampling ratio.  The
variance-optimal allocation sets p_j proportional to a saliency weight
a_j, capped at one; the two-stage scheme spends half the budget on a
pilot reconstruction and allocates the second half by the pilot's
gradient (or patch-PCA saliency).
"""

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleBudgetError, ParameterError
from .operators import apply_diff
from .raster import Observation, validate_map
from .rng import make_rng
from .solver import SolverParams, admm_solve

__all__ = [
    "SamplingPattern",
    "SaliencyField",
    "uniform_probs",
    "grid_pattern",
    "draw_pattern",
    "gradient_magnitude",
    "edge_saliency",
    "greedy_pattern",
    "solve_tau",
    "optimal_probs",
    "pca_saliency",
    "two_stage_pattern",
]


@dataclass(frozen=True)
class SamplingPattern:
    """A realized binary sampling mask plus the probabilities behind it."""

    mask: np.ndarray
    probs: np.ndarray
    target_ratio: float
    seed: int | None = None
    degenerate: bool = False

    @property
    def realized_ratio(self) -> float:
        return float(self.mask.sum()) / self.mask.size

    def __post_init__(self):
        if self.mask.shape != self.probs.shape:
            raise ParameterError("mask and probs shapes differ")


@dataclass(frozen=True)
class SaliencyField:
    """Non-negative per-pixel importance weights."""

    a: np.ndarray

    def __post_init__(self):
        if np.any(self.a < 0) or not np.all(np.isfinite(self.a)):
            raise ParameterError("saliency weights must be finite and non-negative")

    @property
    def degenerate(self) -> bool:
        return not np.any(self.a > 0)


def uniform_probs(shape: tuple[int, int], xi: float) -> np.ndarray:
    """Constant probability field p_j = xi."""
    if not 0.0 < xi < 1.0:
        raise ParameterError(f"sampling ratio must be in (0, 1), got {xi}")
    return np.full(shape, float(xi))


def grid_pattern(shape: tuple[int, int], xi: float) -> SamplingPattern:
    """Deterministic uniform grid with stride round(1/sqrt(xi))."""
    if not 0.0 < xi <= 1.0:
        raise ParameterError(f"sampling ratio must be in (0, 1], got {xi}")
    stride = max(1, round(1.0 / np.sqrt(xi)))
    mask = np.zeros(shape)
    mask[::stride, ::stride] = 1.0
    return SamplingPattern(mask=mask, probs=np.ones(shape),
                           target_ratio=float(xi), seed=None)


def draw_pattern(probs: np.ndarray, seed: int, stream: int = 0) -> SamplingPattern:
    """Independent Bernoulli(p_j) draw, reproducible per (seed, stream)."""
    probs = np.asarray(probs, dtype=np.float64)
    if np.any(probs < 0) or np.any(probs > 1):
        raise ParameterError("probabilities must lie in [0, 1]")
    rng = make_rng(seed, stream)
    mask = (rng.random(probs.shape) < probs).astype(np.float64)
    return SamplingPattern(mask=mask, probs=probs,
                           target_ratio=float(probs.mean()), seed=seed)


def gradient_magnitude(x: np.ndarray) -> SaliencyField:
    """Euclidean magnitude of the periodic forward differences."""
    dx, dy = apply_diff(np.asarray(x, dtype=np.float64))
    return SaliencyField(a=np.hypot(dx, dy))


def edge_saliency(x: np.ndarray) -> SaliencyField:
    """Gradient magnitude extended to cover both sides of each edge.

    A forward difference flags only the pixel on one side of a
    discontinuity; the pixel just across it would then never be sampled
    and its plateau value would be unconstrained.  Taking the maximum of
    the forward- and backward-difference magnitudes flags both sides.
    """
    dx, dy = apply_diff(np.asarray(x, dtype=np.float64))
    fwd = np.hypot(dx, dy)
    bwd = np.hypot(np.roll(dx, 1, axis=1), np.roll(dy, 1, axis=0))
    return SaliencyField(a=np.maximum(fwd, bwd))


def greedy_pattern(x: np.ndarray, alpha: float = 0.1) -> SamplingPattern:
    """Sample exactly the pixels whose gradient exceeds alpha * max gradient."""
    if not 0.0 <= alpha < 1.0:
        raise ParameterError(f"threshold fraction must be in [0, 1), got {alpha}")
    g = gradient_magnitude(x).a
    gmax = g.max()
    if gmax == 0.0:
        return SamplingPattern(mask=np.zeros_like(g), probs=np.ones_like(g),
                               target_ratio=0.0, seed=None, degenerate=True)
    mask = (g > alpha * gmax).astype(np.float64)
    return SamplingPattern(mask=mask, probs=np.ones_like(g),
                           target_ratio=float(mask.mean()), seed=None)


def solve_tau(a: SaliencyField | np.ndarray, xi: float) -> float:
    """Root of g(tau) = sum_j min(tau * a_j, 1) - xi * N.

    g is piecewise linear and nondecreasing with breakpoints at 1/a_j, so
    the root is found exactly by sorting the breakpoints and solving the
    bracketing linear segment in closed form.
    """
    a = a.a if isinstance(a, SaliencyField) else np.asarray(a, dtype=np.float64)
    n = a.size
    budget = xi * n
    flat = a.ravel()
    nz = flat[flat > 0]
    if nz.size < budget:
        raise InfeasibleBudgetError(
            f"{nz.size} positive weights cannot carry an expected budget of {budget}"
        )
    # Between consecutive breakpoints 1/a_(k), g(tau) = k + tau * (sum of
    # still-unsaturated weights); solve each linear segment in closed form
    # and keep the one whose root lies inside the segment.
    order = np.sort(nz)[::-1]  # big a saturates first (breakpoint 1/a small)
    csum = np.cumsum(order)
    k = np.arange(nz.size)
    unsat = csum[-1] - np.concatenate(([0.0], csum[:-1]))
    with np.errstate(divide="ignore"):
        tau_k = np.where(unsat > 0, (budget - k) / unsat, np.inf)
        lo = np.concatenate(([0.0], 1.0 / order[:-1]))
        hi = 1.0 / order
    valid = np.flatnonzero((tau_k >= lo) & (tau_k <= hi))
    if valid.size:
        return float(tau_k[valid[0]])
    # All weights saturated: only consistent if the budget equals their count.
    return float(1.0 / order[-1])


def optimal_probs(a: SaliencyField | np.ndarray, xi: float) -> np.ndarray:
    """Variance-optimal allocation p_j = min(tau * a_j, 1).

    When too few weights are positive to hold the budget, every positive
    weight gets p = 1 and the remainder is spread uniformly.
    """
    arr = a.a if isinstance(a, SaliencyField) else np.asarray(a, dtype=np.float64)
    try:
        tau = solve_tau(arr, xi)
    except InfeasibleBudgetError:
        probs = (arr > 0).astype(np.float64)
        rest = arr <= 0
        leftover = xi * arr.size - probs.sum()
        probs[rest] = leftover / rest.sum()
        return probs
    return np.minimum(tau * arr, 1.0)


def _eigvecs_descending(scatter: np.ndarray) -> np.ndarray:
    """Eigenvectors of a symmetric matrix, columns by descending eigenvalue.

    Signs follow a fixed convention (first nonzero component positive) so
    serialized fields are stable; the saliency uses absolute projections
    and is insensitive to the choice.
    """
    vals, vecs = np.linalg.eigh(scatter)
    vecs = vecs[:, ::-1]
    for i in range(vecs.shape[1]):
        col = vecs[:, i]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            vecs[:, i] = -col
    return vecs


def pca_saliency(img: np.ndarray, patch_side: int = 7, d_prime: int = 16) -> SaliencyField:
    """Per-pixel energy outside the leading patch-space direction.

    Every pixel contributes the patch centered on it (symmetric padding at
    borders).  The patch scatter matrix is eigendecomposed and the
    saliency is the summed absolute projection onto eigenvectors 2..d'.
    """
    img = np.asarray(img, dtype=np.float64)
    if patch_side % 2 == 0 or patch_side < 3:
        raise ParameterError("patch side must be odd and at least 3")
    d = patch_side * patch_side
    if not 1 <= d_prime <= d:
        raise ParameterError(f"d_prime must be in [1, {d}]")
    half = patch_side // 2
    padded = np.pad(img, half, mode="symmetric")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (patch_side, patch_side))
    patches = windows.reshape(-1, d)  # one row per pixel
    scatter = patches.T @ patches
    vecs = _eigvecs_descending(scatter)
    proj = patches @ vecs[:, 1:d_prime]
    a = np.abs(proj).sum(axis=1).reshape(img.shape)
    # Rounding noise in the eigendecomposition leaves harmless residue on
    # (near-)constant images; snap it to an exact zero field.
    a[a < 1e-9 * d * max(1.0, np.abs(patches).max())] = 0.0
    return SaliencyField(a=a)


def two_stage_pattern(measure, shape: tuple[int, int], xi: float, seed: int,
                      pilot_saliency: str = "uniform",
                      params: SolverParams | None = None,
                      stream: int = 0):
    """Pilot-then-refine sampling (half the budget each stage).

    ``measure(mask)`` must return the ground-truth values on the mask's
    support (zeros elsewhere).  Stage 1 draws a Bernoulli pattern at ratio
    xi/2 — uniform, or weighted by patch-PCA saliency of a provided guide
    image (passed as an array in place of the string).  The two Bernoulli
    draws use RNG streams ``stream`` and ``stream + 1``, so independent
    trials can share a base seed.  A pilot reconstruction then
    drives the stage-2 weights: the pilot's gradient magnitude, zeroed on
    stage-1 samples, allocated variance-optimally.  Returns the combined
    pattern, combined observation, and the pilot estimate.
    """
    if not 0.0 < xi < 1.0:
        raise ParameterError(f"sampling ratio must be in (0, 1), got {xi}")
    if isinstance(pilot_saliency, str):
        if pilot_saliency != "uniform":
            raise ParameterError("pilot saliency must be 'uniform' or a guide image")
        p1 = uniform_probs(shape, xi / 2.0)
    else:
        field = pca_saliency(np.asarray(pilot_saliency, dtype=np.float64))
        p1 = (uniform_probs(shape, xi / 2.0) if field.degenerate
              else optimal_probs(field, xi / 2.0))
    s1 = draw_pattern(p1, seed, stream=stream)
    b1 = measure(s1.mask)

    pilot, _ = admm_solve(Observation(values=b1, mask=s1.mask), params)

    a2 = gradient_magnitude(pilot).a
    a2 = np.where(s1.mask > 0, 0.0, a2)  # never re-sample stage-1 pixels
    if not np.any(a2 > 0):
        p2 = np.where(s1.mask > 0, 0.0, xi / 2.0)
    else:
        p2 = optimal_probs(a2, xi / 2.0)
        p2 = np.where(s1.mask > 0, 0.0, p2)
    s2 = draw_pattern(p2, seed, stream=stream + 1)
    b2 = measure(s2.mask)

    mask = s1.mask + s2.mask
    probs = np.minimum(p1 + p2, 1.0)
    pattern = SamplingPattern(mask=mask, probs=probs, target_ratio=float(xi),
                              seed=seed)
    obs = Observation(values=b1 + b2, mask=mask)
    return pattern, obs, pilot
