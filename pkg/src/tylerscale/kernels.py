"""Hot numeric kernels for the sample-built diagonal-output map.

Every kernel exists in two implementations: a pure-numpy one and a numba
``@njit`` one.  The numba path is selected at import time unless the
environment variable ``TYLERSCALE_NO_NUMBA`` is set to a non-empty value
(or numba is not installed), in which case the numpy path is used.
``benchmarks/kernel_bench.py`` compares their throughput: the fused numba
kernels win when the per-iteration arrays no longer fit in cache (large
n), the BLAS-backed numpy path wins in between.

The numba kernels are compiled with fastmath, so the two paths agree to
relative 1e-12, not bitwise; each path is individually deterministic.

All kernels take the sample matrix ``x`` with one sample per row, shape
``(n, p)``, dtype float64.  ``z`` must be symmetric.
"""

import os

import numpy as np

__all__ = [
    "HAS_NUMBA",
    "USE_NUMBA",
    "quad_forms",
    "weighted_scatter",
    "step_stats",
    "quad_forms_numpy",
    "weighted_scatter_numpy",
    "step_stats_numpy",
]


def quad_forms_numpy(x, z):
    """Quadratic forms q_i = x_i^T Z x_i for all rows of ``x``."""
    return np.einsum("ij,ij->i", x @ z, x)


def weighted_scatter_numpy(x, w):
    """Weighted scatter matrix sum_i w_i x_i x_i^T."""
    return (x * w[:, None]).T @ x


def step_stats_numpy(x, z):
    """Quadratic forms and the inverse-weighted scatter in one pass.

    Returns ``(q, m)`` with ``q_i = x_i^T Z x_i`` and
    ``m = sum_i x_i x_i^T / q_i``.  This is the inner work of one
    Sinkhorn/Tyler iteration for the diagonal-output map.
    """
    q = quad_forms_numpy(x, z)
    return q, weighted_scatter_numpy(x, 1.0 / q)


try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    HAS_NUMBA = False

if HAS_NUMBA:

    @njit(cache=True, fastmath=True)
    def _quad_forms_njit(x, z):
        # Symmetry of z halves the multiply count.
        n, p = x.shape
        q = np.empty(n)
        for i in range(n):
            acc = 0.0
            for j in range(p):
                xj = x[i, j]
                acc += z[j, j] * xj * xj
                for k in range(j + 1, p):
                    acc += 2.0 * z[j, k] * xj * x[i, k]
            q[i] = acc
        return q

    @njit(cache=True, fastmath=True)
    def _weighted_scatter_njit(x, w):
        n, p = x.shape
        m = np.zeros((p, p))
        for i in range(n):
            wi = w[i]
            for j in range(p):
                v = wi * x[i, j]
                for k in range(j, p):
                    m[j, k] += v * x[i, k]
        for j in range(p):
            for k in range(j + 1, p):
                m[k, j] = m[j, k]
        return m

    @njit(cache=True, fastmath=True)
    def _step_stats_njit(x, z):
        n, p = x.shape
        q = np.empty(n)
        m = np.zeros((p, p))
        for i in range(n):
            acc = 0.0
            for j in range(p):
                xj = x[i, j]
                acc += z[j, j] * xj * xj
                for k in range(j + 1, p):
                    acc += 2.0 * z[j, k] * xj * x[i, k]
            q[i] = acc
            wi = 1.0 / acc
            for j in range(p):
                v = wi * x[i, j]
                for k in range(j, p):
                    m[j, k] += v * x[i, k]
        for j in range(p):
            for k in range(j + 1, p):
                m[k, j] = m[j, k]
        return q, m


def _ascontig(a):
    return np.ascontiguousarray(a, dtype=np.float64)


USE_NUMBA = HAS_NUMBA and not os.environ.get("TYLERSCALE_NO_NUMBA")

if USE_NUMBA:

    def quad_forms(x, z):
        return _quad_forms_njit(_ascontig(x), _ascontig(z))

    def weighted_scatter(x, w):
        return _weighted_scatter_njit(_ascontig(x), _ascontig(w))

    def step_stats(x, z):
        return _step_stats_njit(_ascontig(x), _ascontig(z))

else:
    quad_forms = quad_forms_numpy
    weighted_scatter = weighted_scatter_numpy
    step_stats = step_stats_numpy

quad_forms.__doc__ = quad_forms_numpy.__doc__
weighted_scatter.__doc__ = weighted_scatter_numpy.__doc__
step_stats.__doc__ = step_stats_numpy.__doc__
