"""Shared fixtures and dense-operator helpers for the test suite."""

import numpy as np
import pytest

from sparsedepth.operators import apply_diff


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def dense_from_linear(op, shape):
    """Materialize a linear operator grid->vector as a dense matrix."""
    n = shape[0] * shape[1]
    probe = op(np.zeros(shape))
    mat = np.zeros((probe.size, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        mat[:, j] = op(e.reshape(shape)).ravel()
    return mat


def dense_diff_matrix(shape):
    """Stacked dense matrix [D_x; D_y] for the periodic differences."""
    n = shape[0] * shape[1]
    mat = np.zeros((2 * n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        dx, dy = apply_diff(e.reshape(shape))
        mat[:, j] = np.concatenate([dx.ravel(), dy.ravel()])
    return mat


def golden_section(f, lo, hi, tol=1e-10, iters=200):
    """Scalar minimizer of a unimodal function on [lo, hi]."""
    invphi = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2
