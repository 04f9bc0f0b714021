"""ADMM solver for disparity reconstruction from sparse samples.

Minimizes

    1/2 ||S x - b||^2 + sum_l lambda_l ||W_l Phi_l^T x||_1
                      + beta (||D_x x||_1 + ||D_y x||_1)

by variable splitting: r = x carries the data term, u_l = Phi_l^T x the
coefficient sparsity terms, and v = D x the total-variation term.  The
x-update is a single frequency-domain division because the dictionaries
are tight frames and D is periodic.  A multiscale wrapper warm-starts the
solve from coarser grids.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError, ShapeError
from .frames import CoefficientSet, FrameDictionary, build_dictionaries, default_partition
from .operators import DiffOperator, apply_diff, diff_adjoint, fft2, ifft2
from .raster import Observation

__all__ = [
    "SolverParams",
    "SolverState",
    "ConvergenceTrace",
    "soft_threshold",
    "x_step",
    "u_step",
    "r_step",
    "v_step",
    "dual_update",
    "objective",
    "admm_solve",
    "multiscale_solve",
    "required_divisor",
    "pad_to_multiple",
]


@dataclass(frozen=True)
class SolverParams:
    """Penalty weights and stopping rule for one solve."""

    lam: tuple[float, ...] = (4e-5, 2e-4)
    beta: float = 2e-3
    rho: tuple[float, ...] = (1e-3, 1e-3)
    mu: float = 1e-2
    gamma: float = 1e-1
    tol: float = 1e-4
    max_iter: int = 500

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(float(v) for v in np.atleast_1d(self.lam)))
        object.__setattr__(self, "rho", tuple(float(v) for v in np.atleast_1d(self.rho)))
        if len(self.lam) != len(self.rho):
            raise ParameterError("lam and rho must have one entry per dictionary")
        vals = (*self.lam, self.beta, *self.rho, self.mu, self.gamma, self.tol)
        if any(v <= 0 for v in vals):
            raise ParameterError("all penalties and tol must be positive")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")


@dataclass
class SolverState:
    """All primal and dual iterates of the ADMM recursion."""

    x: np.ndarray
    u: list[CoefficientSet]
    r: np.ndarray
    v: tuple[np.ndarray, np.ndarray]
    y: list[CoefficientSet]
    w: np.ndarray
    z: tuple[np.ndarray, np.ndarray]
    iter: int = 0
    rel_change: float = np.inf


@dataclass
class ConvergenceTrace:
    """Per-iteration diagnostics of one solve (or one multiscale run)."""

    iters: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    rel_change: list = field(default_factory=list)
    res_r: list = field(default_factory=list)
    res_u: list = field(default_factory=list)
    res_v: list = field(default_factory=list)
    wall_ms: list = field(default_factory=list)
    # Starting iteration index of each multiscale level, coarsest first;
    # empty for a single-scale solve.
    level_starts: list = field(default_factory=list)

    def record(self, it, obj, rel, res_r, res_u, res_v, wall_ms):
        self.iters.append(it)
        self.objective.append(obj)
        self.rel_change.append(rel)
        self.res_r.append(res_r)
        self.res_u.append(tuple(res_u))
        self.res_v.append(res_v)
        self.wall_ms.append(wall_ms)

    def extend(self, other: "ConvergenceTrace"):
        offset = self.iters[-1] + 1 if self.iters else 0
        for i in range(len(other.iters)):
            self.record(offset + other.iters[i], other.objective[i],
                        other.rel_change[i], other.res_r[i], other.res_u[i],
                        other.res_v[i], other.wall_ms[i])

    def to_csv(self) -> str:
        n_dicts = len(self.res_u[0]) if self.res_u else 2
        cols = ["iter", "objective", "rel_change", "res_r"]
        cols += [f"res_u{i + 1}" for i in range(n_dicts)]
        cols += ["res_v", "wall_ms"]
        lines = []
        if self.level_starts:
            starts = ";".join(str(s) for s in self.level_starts)
            lines.append(f"# level_starts={starts}")
        lines.append(",".join(cols))
        for i in range(len(self.iters)):
            row = [str(self.iters[i]), f"{self.objective[i]:.12g}",
                   f"{self.rel_change[i]:.12g}", f"{self.res_r[i]:.12g}"]
            row += [f"{ru:.12g}" for ru in self.res_u[i]]
            row += [f"{self.res_v[i]:.12g}", f"{self.wall_ms[i]:.6g}"]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def soft_threshold(q: np.ndarray, threshold) -> np.ndarray:
    """Elementwise shrinkage: sign(q) * max(|q| - threshold, 0)."""
    threshold = np.asarray(threshold)
    if np.any(threshold < 0):
        raise ParameterError("shrinkage threshold must be non-negative")
    return np.sign(q) * np.maximum(np.abs(q) - threshold, 0.0)


def x_step(u_vecs, y_vecs, r, w, v, z, params: SolverParams,
           dicts: list[FrameDictionary], diff: DiffOperator) -> np.ndarray:
    """Solve ((sum rho + mu) I + gamma D^T D) x = RHS in the Fourier domain."""
    rhs = params.mu * r - w
    for d, uv, yv, rho in zip(dicts, u_vecs, y_vecs, params.rho):
        rhs += d.synthesis(d.zero_coeffs().with_vector(rho * uv - yv))
    rhs += diff_adjoint(params.gamma * v[0] - z[0], params.gamma * v[1] - z[1])
    denom = (sum(params.rho) + params.mu) + params.gamma * diff.spectrum
    return ifft2(fft2(rhs) / denom).real


def u_step(alpha: np.ndarray, y: np.ndarray, lam: float, rho: float,
           weight_mask: np.ndarray) -> np.ndarray:
    """Shrink the analysis coefficients; lowpass entries pass through."""
    return soft_threshold(alpha + y / rho, lam * weight_mask / rho)


def r_step(x: np.ndarray, w: np.ndarray, mask: np.ndarray, b: np.ndarray,
           mu: float) -> np.ndarray:
    """Elementwise data-term update: r = (S b + w + mu x) / (S + mu)."""
    return (mask * b + w + mu * x) / (mask + mu)


def v_step(dx, dy, z, beta: float, gamma: float):
    """TV shrinkage applied independently to each difference component."""
    t = beta / gamma
    return (soft_threshold(dx + z[0] / gamma, t),
            soft_threshold(dy + z[1] / gamma, t))


def dual_update(state: SolverState, params: SolverParams,
                dicts: list[FrameDictionary], alpha_vecs) -> None:
    """Gradient-ascent step on all dual variables, in place."""
    for i, (d, rho) in enumerate(zip(dicts, params.rho)):
        yv = state.y[i].to_vector() - rho * (state.u[i].to_vector() - alpha_vecs[i])
        state.y[i] = d.zero_coeffs().with_vector(yv)
    state.w = state.w - params.mu * (state.r - state.x)
    dx, dy = apply_diff(state.x)
    state.z = (state.z[0] - params.gamma * (state.v[0] - dx),
               state.z[1] - params.gamma * (state.v[1] - dy))


def objective(x: np.ndarray, mask: np.ndarray, b: np.ndarray,
              params: SolverParams, dicts: list[FrameDictionary],
              diff: DiffOperator | None = None) -> float:
    """Evaluate the regularized least-squares objective at x."""
    val = 0.5 * float(np.sum((mask * x - b) ** 2))
    for d, lam in zip(dicts, params.lam):
        val += lam * float(np.sum(np.abs(d.weight_mask * d.analysis(x).to_vector())))
    dx, dy = apply_diff(x)
    val += params.beta * (float(np.sum(np.abs(dx))) + float(np.sum(np.abs(dy))))
    return val


def required_divisor(shape: tuple[int, int],
                     partition: tuple[int, ...] | None = None,
                     wavelet_levels: int = 2) -> int:
    """Side divisibility needed by the transforms for this image size."""
    if partition is None:
        partition = default_partition(shape)
    return max(1 << wavelet_levels, 1 << (len(partition) + max(partition)))


def pad_to_multiple(x: np.ndarray, divisor: int, mode: str = "symmetric"):
    """Pad both sides up to the next multiple of divisor (bottom/right)."""
    h, w = x.shape
    ph = (-h) % divisor
    pw = (-w) % divisor
    if ph == 0 and pw == 0:
        return x.copy(), (h, w)
    if mode == "zeros":
        out = np.zeros((h + ph, w + pw))
        out[:h, :w] = x
        return out, (h, w)
    return np.pad(x, ((0, ph), (0, pw)), mode="symmetric"), (h, w)


def _initial_state(x0, dicts, diff) -> SolverState:
    u = [d.analysis(x0) for d in dicts]
    dx, dy = apply_diff(x0)
    return SolverState(
        x=x0.copy(),
        u=u,
        r=x0.copy(),
        v=(dx, dy),
        y=[d.zero_coeffs() for d in dicts],
        w=np.zeros_like(x0),
        z=(np.zeros_like(x0), np.zeros_like(x0)),
    )


def admm_solve(b: Observation, params: SolverParams | None = None,
               dicts: list[FrameDictionary] | None = None,
               init: SolverState | None = None,
               divisor: int | None = None):
    """Run the ADMM recursion; returns (reconstruction, trace).

    The observation is padded (values symmetrically, mask with zeros) to
    the side divisibility the transforms need, and the result is cropped
    back and clamped to [0, 1].
    """
    params = params or SolverParams()
    values = np.asarray(b.values, dtype=np.float64)
    mask = np.asarray(b.mask, dtype=np.float64)
    if divisor is None:
        divisor = required_divisor(values.shape)
    bp, orig = pad_to_multiple(values, divisor)
    sp, _ = pad_to_multiple(mask, divisor, mode="zeros")
    bp = bp * sp  # unobserved entries carry no data
    if dicts is None:
        dicts = build_dictionaries(bp.shape)
    if dicts[0].shape != bp.shape:
        raise ShapeError(f"dictionaries built for {dicts[0].shape}, problem is {bp.shape}")
    if len(dicts) != len(params.lam):
        raise ParameterError("one lam/rho pair required per dictionary")
    state, trace = _admm_core(bp, sp, params, dicts, init)
    out = np.clip(state.x[: orig[0], : orig[1]], 0.0, 1.0)
    return out, trace


def _admm_core(bp, sp, params, dicts, init):
    """The ADMM recursion on an already-padded problem."""
    diff = DiffOperator(bp.shape)
    state = init if init is not None else _initial_state(bp, dicts, diff)
    trace = ConvergenceTrace()
    t0 = time.perf_counter()
    for it in range(params.max_iter):
        x_prev = state.x
        u_vecs = [u.to_vector() for u in state.u]
        y_vecs = [y.to_vector() for y in state.y]
        state.x = x_step(u_vecs, y_vecs, state.r, state.w, state.v, state.z,
                         params, dicts, diff)
        alpha_vecs = [d.analysis(state.x).to_vector() for d in dicts]
        for i, d in enumerate(dicts):
            uv = u_step(alpha_vecs[i], y_vecs[i], params.lam[i], params.rho[i],
                        d.weight_mask)
            state.u[i] = d.zero_coeffs().with_vector(uv)
        state.r = r_step(state.x, state.w, sp, bp, params.mu)
        dx, dy = apply_diff(state.x)
        state.v = v_step(dx, dy, state.z, params.beta, params.gamma)
        dual_update(state, params, dicts, alpha_vecs)

        state.iter = it + 1
        prev_norm = float(np.linalg.norm(x_prev))
        diff_norm = float(np.linalg.norm(state.x - x_prev))
        if prev_norm > 0:
            state.rel_change = diff_norm / prev_norm
        elif diff_norm == 0:
            state.rel_change = 0.0
        else:
            state.rel_change = np.inf

        res_u = [float(np.linalg.norm(state.u[i].to_vector() - alpha_vecs[i]))
                 for i in range(len(dicts))]
        # Objective from quantities already computed this iteration.
        obj = 0.5 * float(np.sum((sp * state.x - bp) ** 2))
        for i, d in enumerate(dicts):
            obj += params.lam[i] * float(np.sum(np.abs(d.weight_mask * alpha_vecs[i])))
        obj += params.beta * (float(np.sum(np.abs(dx))) + float(np.sum(np.abs(dy))))
        trace.record(
            it,
            obj,
            state.rel_change,
            float(np.linalg.norm(state.r - state.x)),
            res_u,
            float(np.hypot(np.linalg.norm(state.v[0] - dx),
                           np.linalg.norm(state.v[1] - dy))),
            (time.perf_counter() - t0) * 1e3,
        )
        # The first iterate can coincide with the initialization before the
        # dual variables activate, so the stopping test starts at iteration 2.
        if it > 0 and state.rel_change < params.tol:
            break
    return state, trace


def _upsample2(x: np.ndarray) -> np.ndarray:
    """Replicate each pixel into a 2x2 block (two-tap [1, 1] interpolation)."""
    return np.repeat(np.repeat(x, 2, axis=0), 2, axis=1)


def multiscale_solve(b: Observation, params: SolverParams | None = None,
                     levels: int = 3,
                     dicts: list[FrameDictionary] | None = None,
                     divisor: int | None = None,
                     dict_builder=None):
    """Coarse-to-fine ADMM: solve downsampled problems and warm-start.

    Level q keeps every other row/column of level q-1's observation and
    mask; solutions propagate up by 2x replication.  Pixel-domain duals
    are upsampled; coefficient-domain duals restart at zero because the
    subband layouts differ across scales.  ``dict_builder(shape)``, when
    given, constructs the dictionaries for each level.
    """
    params = params or SolverParams()
    if levels < 1:
        raise ParameterError("levels must be at least 1")
    values = np.asarray(b.values, dtype=np.float64)
    mask = np.asarray(b.mask, dtype=np.float64)
    if divisor is None:
        divisor = required_divisor(values.shape)
    full = divisor * (1 << (levels - 1))
    if values.shape[0] < full or values.shape[1] < full:
        raise ParameterError(
            f"{levels} levels need at least {full} pixels per side, got {values.shape}"
        )
    bp, orig = pad_to_multiple(values, full)
    sp, _ = pad_to_multiple(mask, full, mode="zeros")
    bp = bp * sp

    pyr = [(bp, sp)]
    for _ in range(levels - 1):
        pb, ps = pyr[-1]
        pyr.append((pb[::2, ::2], ps[::2, ::2]))

    dict_cache = {}

    def dicts_for(shape):
        if dicts is not None and dicts[0].shape == shape:
            return dicts
        if shape not in dict_cache:
            build = dict_builder if dict_builder is not None else build_dictionaries
            dict_cache[shape] = build(shape)
        return dict_cache[shape]

    trace = ConvergenceTrace()
    state = None
    init = None
    for q in range(levels - 1, -1, -1):
        bq, sq = pyr[q]
        dq = dicts_for(bq.shape)
        # Coarse levels only provide a warm start, so they run with a
        # loosened tolerance; the finest level uses the requested one.
        pq = params if q == 0 else replace(params, tol=params.tol * 4.0**q)
        trace.level_starts.append(trace.iters[-1] + 1 if trace.iters else 0)
        state, t = _admm_core(bq, sq, pq, dq, init)
        trace.extend(t)
        if q > 0:
            x0 = _upsample2(state.x)
            init = _initial_state(x0, dicts_for(x0.shape), DiffOperator(x0.shape))
            init.w = _upsample2(state.w)
            init.z = (_upsample2(state.z[0]), _upsample2(state.z[1]))
    return np.clip(state.x[: orig[0], : orig[1]], 0.0, 1.0), trace
