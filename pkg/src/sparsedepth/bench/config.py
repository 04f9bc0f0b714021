"""Experiment configuration: flat key=value files with strict key checking.

Every key has a single flat name; unknown keys are hard errors because a
silently ignored typo is the main reproducibility hazard in benchmark
configs.  Command-line flags override file values.
"""

from dataclasses import dataclass, fields, replace

from ..errors import ConfigError
from ..solver import SolverParams

__all__ = ["ExperimentConfig", "SweepSpec", "parse_config_file", "config_from_mapping"]

SAMPLING_STRATEGIES = ("uniform", "grid", "greedy", "gradient", "two-stage", "two-stage-pca")
DICTIONARY_SETS = ("wavelet", "contourlet", "combined")
SCENE_KINDS = ("ellipse", "triangle-ellipse", "piecewise-planar")
SWEEP_PARAMS = ("lambda1", "lambda2", "beta", "rho1", "rho2", "mu", "gamma")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one benchmark run depends on."""

    input: str = "synth:ellipse:128x128:0"
    sampling: str = "uniform"
    xi: float = 0.2
    dicts: str = "combined"
    lambda1: float = 4e-5
    lambda2: float = 2e-4
    beta: float = 2e-3
    rho1: float = 1e-3
    rho2: float = 1e-3
    mu: float = 1e-2
    gamma: float = 1e-1
    tol: float = 1e-4
    max_iter: int = 500
    multiscale_q: int = 1
    trials: int = 1
    seed: int = 0
    noise_sigma: float = 0.0
    disparity_levels: int = 255
    workers: int = 1
    output_dir: str = "."

    def validate(self) -> "ExperimentConfig":
        if self.sampling not in SAMPLING_STRATEGIES:
            raise ConfigError(f"sampling must be one of {SAMPLING_STRATEGIES}, "
                              f"got {self.sampling!r}")
        if self.dicts not in DICTIONARY_SETS:
            raise ConfigError(f"dicts must be one of {DICTIONARY_SETS}, got {self.dicts!r}")
        if not 0.0 < self.xi <= 1.0:
            raise ConfigError(f"xi must be in (0, 1], got {self.xi}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.multiscale_q < 1:
            raise ConfigError("multiscale_q must be at least 1")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.disparity_levels < 1:
            raise ConfigError("disparity_levels must be at least 1")
        try:
            self.solver_params()
        except Exception as exc:
            raise ConfigError(f"invalid solver parameters: {exc}") from exc
        return self

    def solver_params(self) -> SolverParams:
        if self.dicts == "wavelet":
            lam, rho = (self.lambda1,), (self.rho1,)
        elif self.dicts == "contourlet":
            lam, rho = (self.lambda2,), (self.rho2,)
        else:
            lam, rho = (self.lambda1, self.lambda2), (self.rho1, self.rho2)
        return SolverParams(lam=lam, beta=self.beta, rho=rho, mu=self.mu,
                            gamma=self.gamma, tol=self.tol, max_iter=self.max_iter)


@dataclass(frozen=True)
class SweepSpec:
    """Log-spaced one-parameter sweep around a base configuration."""

    param: str
    lo: float
    hi: float
    points: int

    def validate(self) -> "SweepSpec":
        if self.param not in SWEEP_PARAMS:
            raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMS}, "
                              f"got {self.param!r}")
        if self.lo <= 0 or self.hi <= 0 or self.hi < self.lo:
            raise ConfigError("sweep bounds must be positive with hi >= lo")
        if self.points < 2:
            raise ConfigError("sweep needs at least 2 points")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def config_from_mapping(mapping: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply string key/value overrides to a base config, strictly."""
    cfg = base or ExperimentConfig()
    updates = {}
    for key, raw in mapping.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        updates[key] = _coerce(key, raw) if isinstance(raw, str) else raw
    return replace(cfg, **updates)


def parse_config_file(path: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read a flat key=value file (# comments, blank lines allowed)."""
    mapping = {}
    try:
        with open(path) as f:
            for lineno, line in enumerate(f, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                mapping[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return config_from_mapping(mapping, base)
