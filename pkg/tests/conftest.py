"""Shared fixtures and generators for the test suite."""

import numpy as np
import pytest

from tylerscale import DiagonalOutputMap, GeneralKrausMap, VectorTuple
from tylerscale.linalg import sym

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def rand_pd(p, rng, spread=1.0):
    """Random well-conditioned PD matrix with eigenvalues around 1."""
    q = np.linalg.qr(rng.standard_normal((p, p)))[0]
    w = np.exp(spread * rng.uniform(-1.0, 1.0, p))
    return sym((q * w) @ q.T)


def rand_traceless(p, rng):
    """Random unit-Frobenius traceless symmetric matrix."""
    x = sym(rng.standard_normal((p, p)))
    x -= np.trace(x) / p * np.eye(p)
    return x / np.linalg.norm(x)


def rand_diagonal_map(rng, p=None, n=None):
    p = p or int(rng.integers(2, 6))
    n = n or int(rng.integers(p + 1, 4 * p))
    return DiagonalOutputMap(rng.standard_normal((n, p)))


def rand_kraus_map(rng, p=None, n=None, r=None):
    p = p or int(rng.integers(2, 5))
    n = n or int(rng.integers(2, 6))
    r = r or int(rng.integers(1, 4))
    return GeneralKrausMap(rng.standard_normal((r, n, p)))


def haar_rows(p, n, rng):
    g = rng.standard_normal((n, p))
    return g / np.linalg.norm(g, axis=1)[:, None]


def rotation_frame(n):
    """n evenly spaced unit directions in the plane: an exactly balanced tuple."""
    theta = np.pi * np.arange(n) / n
    return np.column_stack([np.cos(theta), np.sin(theta)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
