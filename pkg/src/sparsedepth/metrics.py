"""Reconstruction quality metrics: MSE, PSNR, and bad-pixel percentage."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ShapeError

__all__ = ["mse", "psnr", "bad_pixel_pct", "EvalReport", "PSNR_CAP_DB"]

PSNR_CAP_DB = 300.0


def _check_pair(estimate, truth):
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise ShapeError(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    return estimate, truth


def mse(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared error."""
    estimate, truth = _check_pair(estimate, truth)
    return float(np.mean((estimate - truth) ** 2))


def psnr(estimate: np.ndarray, truth: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB, capped at 300 dB for zero error."""
    err = mse(estimate, truth)
    if err == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(peak * peak / err))


def bad_pixel_pct(estimate: np.ndarray, truth: np.ndarray, tau_disparity: float,
                  disparity_levels: int = 255) -> float:
    """Percentage of pixels off by more than tau in integer-disparity units.

    Maps are normalized to [0, 1]; ``disparity_levels`` converts the error
    back to the integer disparity scale the threshold is expressed in.
    """
    if tau_disparity <= 0:
        raise ParameterError("bad-pixel threshold must be positive")
    if disparity_levels < 1:
        raise ParameterError("disparity_levels must be at least 1")
    estimate, truth = _check_pair(estimate, truth)
    err = np.abs(estimate - truth) * disparity_levels
    return float(100.0 * np.mean(err > tau_disparity))


@dataclass(frozen=True)
class EvalReport:
    """One evaluation of an estimate against ground truth."""

    mse: float
    psnr_db: float
    bad_pixel_pct: dict = field(default_factory=dict)  # threshold -> percentage

    CSV_COLUMNS = ("mse", "psnr_db", "bad_pixel_taus", "bad_pixel_pcts")

    @staticmethod
    def evaluate(estimate, truth, taus=(1.0, 2.0, 3.0),
                 disparity_levels: int = 255) -> "EvalReport":
        return EvalReport(
            mse=mse(estimate, truth),
            psnr_db=psnr(estimate, truth),
            bad_pixel_pct={t: bad_pixel_pct(estimate, truth, t, disparity_levels)
                           for t in taus},
        )

    def to_csv_row(self) -> str:
        taus = ";".join(f"{t:g}" for t in self.bad_pixel_pct)
        pcts = ";".join(f"{v:.6g}" for v in self.bad_pixel_pct.values())
        return f"{self.mse:.12g},{self.psnr_db:.6g},{taus},{pcts}"
