"""Sparse-sample disparity reconstruction with multi-frame regularization."""

__version__ = "0.1.0"
