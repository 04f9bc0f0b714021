"""Experiment execution: Monte-Carlo trials, parameter sweeps, traces.

All outputs are plot-ready CSV files.  Result CSVs are byte-identical
across re-runs of the same configuration; wall-clock timings, which are
inherently non-deterministic, go to a separate timings CSV.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from ..errors import ConfigError, ParameterError
from ..frames import build_dictionaries
from ..metrics import EvalReport
from ..raster import Observation, add_gaussian_noise, load_image, synth_scene
from ..rng import split_seed
from ..sampling import (
    draw_pattern,
    edge_saliency,
    greedy_pattern,
    grid_pattern,
    optimal_probs,
    two_stage_pattern,
    uniform_probs,
)
from ..solver import admm_solve, multiscale_solve, required_divisor
from .config import ExperimentConfig, SweepSpec

__all__ = ["load_input", "run_trial", "run_experiment", "run_sweep",
           "emit_convergence", "TrialResult"]

RESULT_COLUMNS = ("trial", "seed", "stream", "realized_ratio", "mse", "psnr_db",
                  "bad1_pct", "bad2_pct", "bad3_pct", "iterations")


def load_input(cfg: ExperimentConfig) -> np.ndarray:
    """Resolve the config's input field to a ground-truth map.

    Either a file path (PGM/PFM) or a synthetic scene spec of the form
    ``synth:<kind>:<width>x<height>:<seed>``.
    """
    spec = cfg.input
    if spec.startswith("synth:"):
        parts = spec.split(":")
        if len(parts) != 4:
            raise ConfigError(f"synthetic input must be synth:<kind>:<WxH>:<seed>, got {spec!r}")
        _, kind, size, seed = parts
        try:
            width, height = (int(v) for v in size.split("x"))
            return synth_scene(kind, width, height, int(seed))
        except (ValueError, ParameterError) as exc:
            raise ConfigError(f"bad synthetic input {spec!r}: {exc}") from exc
    try:
        return load_image(spec)
    except OSError as exc:
        raise ConfigError(f"cannot read input {spec!r}: {exc}") from exc


def _select_dicts(cfg: ExperimentConfig, shape):
    wavelet, contourlet = build_dictionaries(shape)
    if cfg.dicts == "wavelet":
        return [wavelet]
    if cfg.dicts == "contourlet":
        return [contourlet]
    return [wavelet, contourlet]


def _build_observation(cfg: ExperimentConfig, truth, measured, seed, stream):
    """Draw this trial's sampling pattern and the induced observation.

    Oracle strategies (greedy, gradient) weight by the clean ground
    truth; sampled values come from the (possibly noisy) measured map.
    The trial owns RNG streams ``stream .. stream + 2``.
    """
    shape = truth.shape
    if cfg.sampling == "grid":
        pattern = grid_pattern(shape, cfg.xi)
    elif cfg.sampling == "uniform":
        pattern = draw_pattern(uniform_probs(shape, cfg.xi), seed, stream)
    elif cfg.sampling == "greedy":
        pattern = greedy_pattern(truth)
    elif cfg.sampling == "gradient":
        probs = optimal_probs(edge_saliency(truth), cfg.xi)
        pattern = draw_pattern(probs, seed, stream)
    else:  # two-stage variants need a pilot reconstruction
        pilot_params = cfg.solver_params() if cfg.dicts == "combined" else None
        guide = "uniform" if cfg.sampling == "two-stage" else truth
        pattern, obs, _ = two_stage_pattern(
            lambda m: m * measured, shape, cfg.xi, seed,
            pilot_saliency=guide, params=pilot_params, stream=stream)
        return pattern, obs
    return pattern, Observation(values=pattern.mask * measured, mask=pattern.mask)


class TrialResult:
    """Everything one trial produced: estimate, trace, metric row."""

    def __init__(self, trial, seed, stream, estimate, trace, pattern, report, wall_ms):
        self.trial = trial
        self.seed = seed
        self.stream = stream
        self.estimate = estimate
        self.trace = trace
        self.pattern = pattern
        self.report = report
        self.wall_ms = wall_ms

    def row(self):
        taus = sorted(self.report.bad_pixel_pct)
        return (self.trial, self.seed, self.stream,
                self.pattern.realized_ratio, self.report.mse,
                self.report.psnr_db,
                *(self.report.bad_pixel_pct[t] for t in taus[:3]),
                len(self.trace.iters))


def run_trial(cfg: ExperimentConfig, truth: np.ndarray, trial: int) -> TrialResult:
    """One independent Monte-Carlo trial of the configured experiment."""
    seed, index = split_seed(cfg.seed, trial)
    stream = 3 * index
    measured = add_gaussian_noise(truth, cfg.noise_sigma, seed, stream=stream + 2)
    t0 = time.perf_counter()
    pattern, obs = _build_observation(cfg, truth, measured, seed, stream)
    params = cfg.solver_params()
    if cfg.multiscale_q == 1:
        divisor = required_divisor(truth.shape)
        padded = tuple(s + (-s) % divisor for s in truth.shape)
        estimate, trace = admm_solve(obs, params, dicts=_select_dicts(cfg, padded))
    else:
        estimate, trace = multiscale_solve(
            obs, params, levels=cfg.multiscale_q,
            dict_builder=lambda shape: _select_dicts(cfg, shape))
    wall_ms = (time.perf_counter() - t0) * 1e3
    report = EvalReport.evaluate(estimate, truth, taus=(1.0, 2.0, 3.0),
                                 disparity_levels=cfg.disparity_levels)
    return TrialResult(trial, seed, stream, estimate, trace, pattern, report, wall_ms)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _run_all_trials(cfg: ExperimentConfig, truth) -> list[TrialResult]:
    if cfg.workers == 1 or cfg.trials == 1:
        return [run_trial(cfg, truth, t) for t in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(run_trial, cfg, truth, t) for t in range(cfg.trials)]
        return [f.result() for f in futures]  # ordered by trial index


def results_csv(results: list[TrialResult]) -> str:
    """Per-trial rows plus mean and std aggregate rows (deterministic)."""
    lines = [",".join(RESULT_COLUMNS)]
    rows = [r.row() for r in results]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    data = np.array([row[3:] for row in rows], dtype=np.float64)
    for name, agg in (("mean", data.mean(axis=0)), ("std", data.std(axis=0))):
        lines.append(",".join([name, "", ""] + [_fmt(v) for v in agg]))
    return "\n".join(lines) + "\n"


def timings_csv(results: list[TrialResult]) -> str:
    lines = ["trial,wall_ms"]
    for r in results:
        lines.append(f"{r.trial},{r.wall_ms:.6g}")
    return "\n".join(lines) + "\n"


def run_experiment(cfg: ExperimentConfig, write: bool = True):
    """Run all trials; optionally write results.csv and timings.csv.

    Returns the trial results and the deterministic results CSV text.
    """
    cfg.validate()
    truth = load_input(cfg)
    results = _run_all_trials(cfg, truth)
    csv_text = results_csv(results)
    if write:
        os.makedirs(cfg.output_dir, exist_ok=True)
        with open(os.path.join(cfg.output_dir, "results.csv"), "w") as f:
            f.write(csv_text)
        with open(os.path.join(cfg.output_dir, "timings.csv"), "w") as f:
            f.write(timings_csv(results))
    return results, csv_text


SWEEP_COLUMNS = ("param", "value", "input", "mean_mse", "mean_psnr_db",
                 "mean_iterations")


def run_sweep(spec: SweepSpec, cfg: ExperimentConfig, write: bool = True):
    """Log-spaced single-parameter sweep; one CSV row per grid point."""
    spec.validate()
    cfg.validate()
    values = np.logspace(np.log10(spec.lo), np.log10(spec.hi), spec.points)
    truth = load_input(cfg)
    lines = [",".join(SWEEP_COLUMNS)]
    points = []
    for value in values:
        cfg_v = replace(cfg, **{spec.param: float(value)}).validate()
        results = _run_all_trials(cfg_v, truth)
        mean_mse = float(np.mean([r.report.mse for r in results]))
        mean_psnr = float(np.mean([r.report.psnr_db for r in results]))
        mean_iters = float(np.mean([len(r.trace.iters) for r in results]))
        points.append((float(value), mean_mse, mean_psnr, mean_iters))
        lines.append(",".join([spec.param, _fmt(value), cfg.input,
                               _fmt(mean_mse), _fmt(mean_psnr), _fmt(mean_iters)]))
    csv_text = "\n".join(lines) + "\n"
    if write:
        os.makedirs(cfg.output_dir, exist_ok=True)
        with open(os.path.join(cfg.output_dir, f"sweep_{spec.param}.csv"), "w") as f:
            f.write(csv_text)
    return points, csv_text


def emit_convergence(cfg: ExperimentConfig, write: bool = True):
    """Per-iteration trace CSV of a single trial (requires trials=1).

    For a multiscale run the trace carries a leading comment line with
    the starting iteration of each level.
    """
    cfg.validate()
    if cfg.trials != 1:
        raise ConfigError("convergence traces require trials=1")
    truth = load_input(cfg)
    result = run_trial(cfg, truth, 0)
    csv_text = result.trace.to_csv()
    if write:
        os.makedirs(cfg.output_dir, exist_ok=True)
        with open(os.path.join(cfg.output_dir, "trace.csv"), "w") as f:
            f.write(csv_text)
    return result, csv_text
