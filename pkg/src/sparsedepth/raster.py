"""Disparity-map representation, file I/O, and synthetic scene generation.

A disparity map is a 2-D float64 array with values in [0, 1].  Supported
file formats are binary PGM (P5, maxval 255 or 65535) for integer data and
grayscale PFM (little-endian) for lossless float fixtures.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, FormatError, ParameterError
from .rng import make_rng

__all__ = [
    "Observation",
    "load_image",
    "save_image",
    "synth_scene",
    "add_gaussian_noise",
    "validate_map",
]

MAX_DIM = 32768

FORMATS = ("pgm-8", "pgm-16", "pfm-float")


@dataclass(frozen=True)
class Observation:
    """Sampled disparity values: zeros wherever the mask is zero."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.mask.shape:
            raise ParameterError("observation values and mask shapes differ")


def validate_map(x: np.ndarray) -> np.ndarray:
    """Check disparity-map invariants and return the array as float64."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or min(x.shape) < 2:
        raise ParameterError(f"disparity map must be 2-D with both sides >= 2, got {x.shape}")
    if not np.all(np.isfinite(x)) or x.min() < 0.0 or x.max() > 1.0:
        raise ParameterError("disparity values must be finite and within [0, 1]")
    return x


def _read_pgm_token(f) -> bytes:
    # Skips whitespace and '#' comment lines between header tokens.
    tok = b""
    while True:
        c = f.read(1)
        if c == b"":
            raise FormatError("unexpected end of PGM header")
        if c == b"#":
            while c not in (b"\n", b""):
                c = f.read(1)
            continue
        if c.isspace():
            if tok:
                return tok
            continue
        tok += c


def load_image(path, format: str | None = None) -> np.ndarray:
    """Load a PGM/PFM file and normalize to [0, 1].

    Integer formats are divided by their maxval; PFM data is taken as-is
    and must already lie in [0, 1].  If ``format`` is given it must agree
    with the file content.
    """
    with open(path, "rb") as f:
        magic = f.read(2)
        if magic == b"P5":
            return _load_pgm(f, format)
        if magic == b"Pf":
            if format not in (None, "pfm-float"):
                raise FormatError(f"expected {format}, file is PFM")
            return _load_pfm(f)
    raise FormatError(f"unsupported magic {magic!r}; expected P5 (PGM) or Pf (PFM)")


def _load_pgm(f, format):
    try:
        width = int(_read_pgm_token(f))
        height = int(_read_pgm_token(f))
        maxval = int(_read_pgm_token(f))
    except ValueError as exc:
        raise FormatError(f"malformed PGM header: {exc}") from exc
    if width <= 0 or height <= 0 or width > MAX_DIM or height > MAX_DIM:
        raise CapacityError(f"PGM dimensions {width}x{height} out of supported range")
    if maxval == 255:
        dtype, detected = np.dtype(">u1"), "pgm-8"
    elif maxval == 65535:
        dtype, detected = np.dtype(">u2"), "pgm-16"
    else:
        raise FormatError(f"unsupported PGM maxval {maxval}")
    if format not in (None, detected):
        raise FormatError(f"expected {format}, file is {detected}")
    raw = f.read(width * height * dtype.itemsize)
    if len(raw) != width * height * dtype.itemsize:
        raise FormatError("truncated PGM pixel data")
    data = np.frombuffer(raw, dtype=dtype).reshape(height, width)
    return data.astype(np.float64) / maxval


def _load_pfm(f):
    try:
        dims = f.readline().split()
        if len(dims) == 0:
            dims = f.readline().split()
        width, height = (int(v) for v in dims)
        scale = float(f.readline())
    except ValueError as exc:
        raise FormatError(f"malformed PFM header: {exc}") from exc
    if width <= 0 or height <= 0 or width > MAX_DIM or height > MAX_DIM:
        raise CapacityError(f"PFM dimensions {width}x{height} out of supported range")
    dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
    raw = f.read(width * height * 4)
    if len(raw) != width * height * 4:
        raise FormatError("truncated PFM pixel data")
    data = np.frombuffer(raw, dtype=dtype).reshape(height, width)
    # PFM stores rows bottom-to-top.
    return np.ascontiguousarray(data[::-1]).astype(np.float64)


def save_image(x: np.ndarray, path, format: str = "pgm-16") -> None:
    """Write a disparity map; round-trips within the format's quantization."""
    x = validate_map(x)
    height, width = x.shape
    if format == "pgm-8":
        payload = np.rint(x * 255).astype(">u1").tobytes()
        header = f"P5\n{width} {height}\n255\n".encode()
    elif format == "pgm-16":
        payload = np.rint(x * 65535).astype(">u2").tobytes()
        header = f"P5\n{width} {height}\n65535\n".encode()
    elif format == "pfm-float":
        header = f"Pf\n{width} {height}\n{-1.0}\n".encode()
        payload = x[::-1].astype("<f4").tobytes()
    else:
        raise ParameterError(f"unknown format {format!r}; choose from {FORMATS}")
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(payload)
    except OSError as exc:
        raise FormatError(f"write failed for {path}: {exc}") from exc


def _ellipse_mask(h, w, cy, cx, ay, ax, angle):
    yy, xx = np.mgrid[0:h, 0:w]
    y = yy - cy
    x = xx - cx
    c, s = np.cos(angle), np.sin(angle)
    u = c * x + s * y
    v = -s * x + c * y
    return (u / ax) ** 2 + (v / ay) ** 2 <= 1.0


def _triangle_mask(h, w, pts):
    yy, xx = np.mgrid[0:h, 0:w]
    inside = np.ones((h, w), dtype=bool)
    for i in range(3):
        y0, x0 = pts[i]
        y1, x1 = pts[(i + 1) % 3]
        y2, x2 = pts[(i + 2) % 3]
        # Half-plane test: same side as the opposite vertex.
        cross = (x1 - x0) * (yy - y0) - (y1 - y0) * (xx - x0)
        ref = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        inside &= cross * ref >= 0
    return inside


def synth_scene(kind: str, width: int, height: int, seed: int = 0) -> np.ndarray:
    """Generate a synthetic piecewise disparity map with hard edges.

    Kinds: ``ellipse`` (two constant plateaus), ``triangle-ellipse``
    (three plateaus, triangle overlapping an ellipse), and
    ``piecewise-planar`` (tilted planes over convex regions).
    Deterministic for a fixed (kind, size, seed).
    """
    if width < 32 or height < 32:
        raise ParameterError("synthetic scenes require width, height >= 32")
    rng = make_rng(seed, stream=0)
    h, w = height, width

    if kind == "ellipse":
        bg = rng.uniform(0.15, 0.35)
        fg = rng.uniform(0.6, 0.9)
        cy = rng.uniform(0.4, 0.6) * h
        cx = rng.uniform(0.4, 0.6) * w
        ay = rng.uniform(0.18, 0.3) * h
        ax = rng.uniform(0.18, 0.3) * w
        angle = rng.uniform(0, np.pi)
        x = np.full((h, w), bg)
        x[_ellipse_mask(h, w, cy, cx, ay, ax, angle)] = fg
    elif kind == "triangle-ellipse":
        # Moderate plateau separation: keeps the two overlapping shapes
        # clearly distinct while leaving the reconstruction problem in the
        # mid-30s-dB PSNR regime at 10% sampling.
        bg = rng.uniform(0.36, 0.40)
        ell = rng.uniform(0.48, 0.53)
        tri = rng.uniform(0.59, 0.66)
        cy = rng.uniform(0.35, 0.5) * h
        cx = rng.uniform(0.35, 0.5) * w
        ay = rng.uniform(0.2, 0.28) * h
        ax = rng.uniform(0.2, 0.28) * w
        angle = rng.uniform(0, np.pi)
        x = np.full((h, w), bg)
        x[_ellipse_mask(h, w, cy, cx, ay, ax, angle)] = ell
        pts = [
            (rng.uniform(0.45, 0.6) * h, rng.uniform(0.45, 0.6) * w),
            (rng.uniform(0.75, 0.95) * h, rng.uniform(0.25, 0.45) * w),
            (rng.uniform(0.7, 0.95) * h, rng.uniform(0.7, 0.95) * w),
        ]
        x[_triangle_mask(h, w, pts)] = tri
    elif kind == "piecewise-planar":
        yy, xx = np.mgrid[0:h, 0:w]
        gy = rng.uniform(-0.1, 0.1)
        gx = rng.uniform(-0.1, 0.1)
        x = 0.3 + gy * yy / h + gx * xx / w
        for _ in range(6):
            cy = rng.uniform(0.15, 0.85) * h
            cx = rng.uniform(0.15, 0.85) * w
            ay = rng.uniform(0.08, 0.22) * h
            ax = rng.uniform(0.08, 0.22) * w
            angle = rng.uniform(0, np.pi)
            base = rng.uniform(0.2, 0.9)
            sy = rng.uniform(-0.25, 0.25)
            sx = rng.uniform(-0.25, 0.25)
            mask = _ellipse_mask(h, w, cy, cx, ay, ax, angle)
            plane = base + sy * (yy - cy) / h + sx * (xx - cx) / w
            x = np.where(mask, plane, x)
        x = np.clip(x, 0.0, 1.0)
    else:
        raise ParameterError(f"unknown scene kind {kind!r}")
    return validate_map(x)


def add_gaussian_noise(x: np.ndarray, sigma: float, seed: int = 0,
                       stream: int = 1) -> np.ndarray:
    """Add i.i.d. N(0, sigma^2) noise and clamp to [0, 1]; seeded."""
    x = validate_map(x)
    if sigma < 0:
        raise ParameterError("sigma must be non-negative")
    if sigma == 0:
        return x.copy()
    rng = make_rng(seed, stream=stream)
    noisy = x + rng.normal(0.0, sigma, size=x.shape)
    return np.clip(noisy, 0.0, 1.0)
