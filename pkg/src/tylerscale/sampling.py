"""Samplers, finite-precision rounding, and Monte Carlo oracles.

All randomness flows through one 64-bit-seeded counter-based generator
(Philox); independent purposes and trials get independent streams via
spawn keys, so every experiment is reproducible from a single seed and
results do not depend on execution order.
"""

from dataclasses import dataclass

import numpy as np

from .cpmap import VectorTuple
from .errors import DimMismatch, InvalidArgument, RoundedToZero
from .linalg import PDMatrix, mat_sqrt, op_norm_sym

# Stream ids for the per-purpose substreams of one seed.
STREAM_ELLIPTICAL = 1
STREAM_HAAR = 2
STREAM_SWEEP = 3
STREAM_CONVERGE = 4


def stream_rng(seed, *key):
    """Counter-based generator for the given seed and purpose key."""
    if seed < 0:
        raise InvalidArgument("seed must be nonnegative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def haar_unit(p, rng):
    """One uniformly random unit vector, via a normalized Gaussian."""
    if p < 1:
        raise InvalidArgument("p must be at least 1")
    while True:
        g = rng.standard_normal(p)
        norm = np.linalg.norm(g)
        if norm > 1e-100:
            return g / norm


def haar_unit_batch(p, n, rng):
    """n independent Haar unit vectors, one per row."""
    g = rng.standard_normal((n, p))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms <= 1e-100):
        bad = norms <= 1e-100
        g[bad] = rng.standard_normal((int(np.sum(bad)), p))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


@dataclass(frozen=True)
class UDist:
    """Radial scale distribution of an elliptical law.

    ``const`` (u = 1), ``lognormal`` (exp of s times a standard normal),
    ``pareto`` (tail index a, support from 1), or ``cauchy`` (absolute
    value of a standard Cauchy; no moments).  The estimator never sees u.
    """

    kind: str
    param: float = 0.0

    _KINDS = ("const", "lognormal", "pareto", "cauchy")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InvalidArgument(f"unknown u distribution {self.kind!r}")
        if self.kind in ("lognormal", "pareto") and self.param <= 0.0:
            raise InvalidArgument(f"{self.kind} needs a positive parameter")

    @classmethod
    def parse(cls, text):
        """Parse 'const', 'lognormal:S', 'pareto:A', or 'cauchy'."""
        kind, _, arg = text.partition(":")
        if kind in ("const", "cauchy"):
            if arg:
                raise InvalidArgument(f"{kind} takes no parameter")
            return cls(kind)
        if kind in ("lognormal", "pareto"):
            try:
                return cls(kind, float(arg))
            except ValueError:
                raise InvalidArgument(f"{kind} needs a numeric parameter, got {arg!r}") from None
        raise InvalidArgument(f"unknown u distribution {text!r}")

    @property
    def label(self):
        if self.kind in ("const", "cauchy"):
            return self.kind
        return f"{self.kind}:{self.param:.17g}"

    def draw(self, rng, n):
        if self.kind == "const":
            return np.ones(n)
        if self.kind == "lognormal":
            return np.exp(self.param * rng.standard_normal(n))
        if self.kind == "pareto":
            return (1.0 - rng.random(n)) ** (-1.0 / self.param)
        return np.abs(rng.standard_cauchy(n))


@dataclass(frozen=True)
class EllipticalSpec:
    """Defines the elliptical law u * shape^{1/2} * V with a fixed seed."""

    p: int
    shape: PDMatrix
    u_dist: UDist
    seed: int

    def __post_init__(self):
        shape = self.shape if isinstance(self.shape, PDMatrix) else PDMatrix(self.shape)
        if shape.dim != self.p:
            raise DimMismatch(f"shape has dim {shape.dim}, expected {self.p}")
        object.__setattr__(self, "shape", shape)


def identity_spec(p, seed, u_dist=UDist("const")):
    return EllipticalSpec(p=p, shape=PDMatrix(np.eye(p)), u_dist=u_dist, seed=seed)


def sample_elliptical(spec, n, key=()):
    """n i.i.d. draws ``u_i * shape^{1/2} v_i``, reproducible from the seed.

    ``key`` extends the stream id, giving independent substreams for
    parallel trials without changing any other trial's output.
    """
    if n < 1:
        raise InvalidArgument("n must be at least 1")
    rng = stream_rng(spec.seed, STREAM_ELLIPTICAL, *key)
    v = haar_unit_batch(spec.p, n, rng)
    u = spec.u_dist.draw(rng, n)
    root = mat_sqrt(spec.shape).entries
    return VectorTuple(u[:, None] * (v @ root))


def round_bits(x, bits):
    """Round every entry to the nearest multiple of 2^-b, ties to even.

    ``bits`` is a single count or one per sample.  The entrywise error is
    at most 2^{-b-1}; a sample annihilated by rounding raises.
    """
    xt = x if isinstance(x, VectorTuple) else VectorTuple(x)
    b = np.broadcast_to(np.asarray(bits, dtype=np.int64), (xt.n,))
    if np.any(b < 1):
        raise InvalidArgument("bit counts must be at least 1")
    scale = np.exp2(b.astype(np.float64))[:, None]
    rounded = np.rint(xt.vectors * scale) / scale
    if np.any(np.all(rounded == 0.0, axis=1)):
        idx = int(np.flatnonzero(np.all(rounded == 0.0, axis=1))[0])
        raise RoundedToZero(f"sample {idx} rounded to zero at {int(b[idx])} bits")
    return VectorTuple(rounded)


def coordinate_mass_moment(p, k, j):
    """j-th raw moment of the mass of k coordinates of a Haar unit vector.

    The sum of squares of k coordinates follows Beta(k/2, (p-k)/2); its
    raw moments are products of (alpha + r) / (alpha + beta + r).
    """
    if not 1 <= k <= p:
        raise InvalidArgument("need 1 <= k <= p")
    if j < 1:
        raise InvalidArgument("moment order must be at least 1")
    if k == p:
        return 1.0
    alpha, beta = k / 2.0, (p - k) / 2.0
    out = 1.0
    for r in range(j):
        out *= (alpha + r) / (alpha + beta + r)
    return out


def covariance_concentration(v):
    """Exact operator norm of ``(p/n) sum_i v_i v_i^T - I`` for unit vectors."""
    vt = v if isinstance(v, VectorTuple) else VectorTuple(v)
    if np.max(np.abs(vt.norms() - 1.0)) > 1e-8:
        raise InvalidArgument("covariance concentration expects unit vectors")
    m = vt.p / vt.n * (vt.vectors.T @ vt.vectors) - np.eye(vt.p)
    return op_norm_sym(m)
