"""Command-line interface.

Subcommands: ``reconstruct`` (one solve, writes image + trace),
``sample`` (emit mask/probs only), ``bench`` (Monte-Carlo experiment),
``sweep`` (parameter sweep), ``trace`` (convergence trace).  Every flag
mirrors an ExperimentConfig key; ``--config FILE`` loads a flat
key=value file first and flags override it.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

import argparse
import os
import sys
from dataclasses import fields, replace

from ..errors import ConfigError, SparseDepthError
from ..raster import save_image
from .config import ExperimentConfig, SweepSpec, config_from_mapping, parse_config_file
from .runner import (
    emit_convergence,
    load_input,
    run_experiment,
    run_sweep,
    run_trial,
)

__all__ = ["main", "build_parser"]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE",
                        help="flat key=value config file; flags override it")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper(),
                            help=f"override config key {f.name!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsedepth",
        description="Dense disparity reconstruction from sparse samples "
                    "and sampling-pattern design.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reconstruct", help="single solve; writes estimate, mask, trace")
    _add_config_flags(p)
    p = sub.add_parser("sample", help="emit sampling mask and probabilities only")
    _add_config_flags(p)
    p = sub.add_parser("bench", help="Monte-Carlo experiment; writes results.csv")
    _add_config_flags(p)
    p = sub.add_parser("sweep", help="log-spaced single-parameter sweep")
    _add_config_flags(p)
    p.add_argument("--sweep-param", required=True,
                   help="parameter to sweep (lambda1, lambda2, beta, rho1, rho2, mu, gamma)")
    p.add_argument("--sweep-lo", required=True, type=float, help="lower grid bound")
    p.add_argument("--sweep-hi", required=True, type=float, help="upper grid bound")
    p.add_argument("--sweep-points", required=True, type=int, help="grid point count")
    p = sub.add_parser("trace", help="per-iteration convergence trace (trials=1)")
    _add_config_flags(p)
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        cfg = parse_config_file(args.config, cfg)
    overrides = {f.name: getattr(args, f.name) for f in fields(ExperimentConfig)
                 if getattr(args, f.name) is not None}
    return config_from_mapping(overrides, cfg).validate()


def _cmd_reconstruct(cfg: ExperimentConfig) -> None:
    if cfg.trials != 1:
        raise ConfigError("reconstruct runs a single trial; set trials=1")
    truth = load_input(cfg)
    result = run_trial(cfg, truth, 0)
    os.makedirs(cfg.output_dir, exist_ok=True)
    save_image(result.estimate, os.path.join(cfg.output_dir, "estimate.pgm"), "pgm-16")
    save_image(result.pattern.mask, os.path.join(cfg.output_dir, "mask.pgm"), "pgm-8")
    with open(os.path.join(cfg.output_dir, "trace.csv"), "w") as f:
        f.write(result.trace.to_csv())
    taus = sorted(result.report.bad_pixel_pct)
    bad = " ".join(f"bad{t:g}={result.report.bad_pixel_pct[t]:.3f}%" for t in taus)
    print(f"psnr={result.report.psnr_db:.2f}dB mse={result.report.mse:.3e} {bad} "
          f"iters={len(result.trace.iters)} samples={result.pattern.realized_ratio:.4f}")


def _cmd_sample(cfg: ExperimentConfig) -> None:
    from ..raster import add_gaussian_noise
    from ..rng import split_seed
    from .runner import _build_observation

    truth = load_input(cfg)
    seed, index = split_seed(cfg.seed, 0)
    measured = add_gaussian_noise(truth, cfg.noise_sigma, seed, stream=2)
    pattern, _ = _build_observation(cfg, truth, measured, seed, 0)
    os.makedirs(cfg.output_dir, exist_ok=True)
    save_image(pattern.mask, os.path.join(cfg.output_dir, "mask.pgm"), "pgm-8")
    save_image(pattern.probs, os.path.join(cfg.output_dir, "probs.pfm"), "pfm-float")
    print(f"samples={int(pattern.mask.sum())} ratio={pattern.realized_ratio:.4f} "
          f"target={pattern.target_ratio:.4f}")


def _cmd_bench(cfg: ExperimentConfig) -> None:
    results, _ = run_experiment(cfg)
    psnrs = [r.report.psnr_db for r in results]
    mean = sum(psnrs) / len(psnrs)
    print(f"trials={len(results)} mean_psnr={mean:.2f}dB "
          f"results={os.path.join(cfg.output_dir, 'results.csv')}")


def _cmd_sweep(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    spec = SweepSpec(param=args.sweep_param, lo=args.sweep_lo,
                     hi=args.sweep_hi, points=args.sweep_points).validate()
    points, _ = run_sweep(spec, cfg)
    best = min(points, key=lambda p: p[1])
    print(f"swept {spec.param} over {spec.points} points; "
          f"min mean MSE {best[1]:.3e} at {spec.param}={best[0]:.3e}")


def _cmd_trace(cfg: ExperimentConfig) -> None:
    result, _ = emit_convergence(cfg)
    print(f"iters={len(result.trace.iters)} "
          f"final_rel_change={result.trace.rel_change[-1]:.3e} "
          f"trace={os.path.join(cfg.output_dir, 'trace.csv')}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "reconstruct":
            _cmd_reconstruct(cfg)
        elif args.command == "sample":
            _cmd_sample(cfg)
        elif args.command == "bench":
            _cmd_bench(cfg)
        elif args.command == "sweep":
            _cmd_sweep(cfg, args)
        else:
            _cmd_trace(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SparseDepthError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
