"""Exception types shared across the package."""


class SparseDepthError(Exception):
    """Base class for all package-specific errors."""


class FormatError(SparseDepthError):
    """Malformed or unsupported image file content."""


class CapacityError(SparseDepthError):
    """Image dimensions exceed what the implementation supports."""


class ParameterError(SparseDepthError):
    """An argument is outside its documented domain."""


class ShapeError(SparseDepthError):
    """Array dimensions incompatible with the requested operation."""


class InfeasibleBudgetError(SparseDepthError):
    """Too few nonzero saliency weights to place the requested sample budget."""


class ConfigError(SparseDepthError):
    """Invalid experiment configuration (unknown key, missing file, bad value)."""
