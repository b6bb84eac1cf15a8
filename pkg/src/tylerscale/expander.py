"""Exact quantum-expansion, spectral-gap, and conductance diagnostics.

Everything here goes through dense matrixizations and full SVDs: at desk
scale the singular values of a map are computed exactly rather than
estimated.  The Cheeger machinery reports *upper bounds* with explicit
witnesses, since the true constant is an infimum over all projections.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cpmap import DEFAULT_BUDGET, VectorTuple, identity_coeffs
from .errors import NotOrthogonal, RankTooLarge
from .linalg import op_norm_sym

_EIGEN_SUBSET_CAP = 4096
_SPAN_CAP = 20000
_EXACT_SUBSET_LIMIT = 20


@dataclass(frozen=True)
class ExpansionReport:
    """Spectral summary of one completely positive map.

    ``lam`` is defined by ``traceless_sup = (1 - lam) * size / sqrt(np)``;
    for p = 1 the traceless space is empty and ``lam = 1`` by convention.
    """

    eps: float
    lam: float
    sigma1: float
    sigma2: float
    size: float
    traceless_sup: float


def spectral_gap(phi, budget=None):
    """Top two singular values of the map in its orthonormal matrixization."""
    sv = np.linalg.svd(phi.as_matrix(budget or DEFAULT_BUDGET), compute_uv=False)
    s1 = float(sv[0])
    s2 = float(sv[1]) if sv.size > 1 else 0.0
    return s1, s2


def expansion_constant(phi, budget=None):
    """Exact expansion report: balance defect, traceless sup, lambda, gap."""
    m = phi.as_matrix(budget or DEFAULT_BUDGET)
    n, p = phi.out_dim, phi.in_dim
    s = phi.size()
    sv = np.linalg.svd(m, compute_uv=False)
    sigma1 = float(sv[0])
    sigma2 = float(sv[1]) if sv.size > 1 else 0.0
    if p == 1:
        sup = 0.0
        lam = 1.0
    else:
        t = identity_coeffs(p)
        deflated = m - np.outer(m @ t, t)
        sup = float(np.linalg.svd(deflated, compute_uv=False)[0])
        lam = 1.0 - sup * math.sqrt(n * p) / s
    eps = phi.balancedness().eps
    return ExpansionReport(eps=eps, lam=float(lam), sigma1=sigma1, sigma2=sigma2,
                           size=s, traceless_sup=sup)


def b_matrix(v, u):
    """Nonnegative n x p matrix with entries ``(U v_i)_j ** 2``.

    Row i holds the squared coordinates of ``U v_i``, so row sums equal
    ``||v_i||^2``.
    """
    if not isinstance(v, VectorTuple):
        v = VectorTuple(v)
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (v.p, v.p):
        raise NotOrthogonal(f"U must be {v.p}x{v.p}, got shape {u.shape}")
    if op_norm_sym(u.T @ u - np.eye(v.p)) > 1e-10:
        raise NotOrthogonal("U is not orthogonal within 1e-10")
    return (v.vectors @ u.T) ** 2


def b_matrix_traceless_sup(b):
    """sup of ``||B x|| / ||x||`` over coordinate vectors x orthogonal to 1."""
    b = np.asarray(b, dtype=np.float64)
    p = b.shape[1]
    ones = np.full(p, 1.0 / math.sqrt(p))
    deflated = b - np.outer(b @ ones, ones)
    return float(np.linalg.svd(deflated, compute_uv=False)[0])


@dataclass(frozen=True)
class Cut:
    """A cut: a subset of sample indices and a low-rank orthogonal projection."""

    subset: tuple
    projection: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "subset", tuple(sorted(int(i) for i in self.subset)))
        pi = np.asarray(self.projection, dtype=np.float64)
        scale = max(np.linalg.norm(pi), 1.0)
        if np.linalg.norm(pi - pi.T) > 1e-10 * scale:
            raise RankTooLarge("projection is not symmetric within 1e-10")
        if np.linalg.norm(pi @ pi - pi) > 1e-10 * scale:
            raise RankTooLarge("projection is not idempotent within 1e-10")
        object.__setattr__(self, "projection", pi)

    @property
    def rank(self):
        return int(round(np.trace(self.projection)))


def _require_unit(v):
    if not isinstance(v, VectorTuple):
        v = VectorTuple(v)
    if np.max(np.abs(v.norms() - 1.0)) > 1e-8:
        raise ValueError("conductance is defined for unit-norm vectors; normalize first")
    return v


def _cut_masses(vectors, pi):
    a = np.sum((vectors @ pi) ** 2, axis=1)
    c = np.sum((vectors @ (np.eye(pi.shape[0]) - pi)) ** 2, axis=1)
    return a, c


def conductance(v, cut):
    """Conductance of one cut; +inf when the volume denominator vanishes.

    cut(S, pi) counts the projection mass on the wrong side of the split:
    ``sum_{i in S} ||(I - pi) v_i||^2 + sum_{i not in S} ||pi v_i||^2``,
    normalized by ``min(vol(S, pi), vol(~S, I - pi))`` with
    ``vol(S, pi) = sum_i ||pi v_i||^2 + |S|``.
    """
    v = _require_unit(v)
    pi = cut.projection
    if pi.shape != (v.p, v.p):
        raise RankTooLarge(f"projection must be {v.p}x{v.p}")
    if 2 * cut.rank > v.p:
        raise RankTooLarge(f"rank {cut.rank} exceeds p/2 = {v.p / 2}")
    in_s = np.zeros(v.n, dtype=bool)
    in_s[list(cut.subset)] = True
    a, c = _cut_masses(v.vectors, pi)
    cut_val = float(np.sum(c[in_s]) + np.sum(a[~in_s]))
    vol1 = float(np.sum(a) + np.count_nonzero(in_s))
    vol2 = float(np.sum(c) + np.count_nonzero(~in_s))
    denom = min(vol1, vol2)
    if denom <= 0.0:
        return math.inf
    return cut_val / denom


@dataclass(frozen=True)
class CandidateBudget:
    """Search budget for the Cheeger upper bound.

    ``span_size`` caps the size of sample subsets whose spans become
    candidate projections, ``random_count`` is the number of Haar-random
    projections tried per rank, and ``seed`` fixes those draws.
    """

    span_size: int = 2
    random_count: int = 8
    seed: int = 0


def _subset_sums(w):
    s = np.zeros(1)
    for wi in w:
        s = np.concatenate([s, s + wi])
    return s


def _popcounts(n):
    s = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        s = np.concatenate([s, s + 1])
    return s


def _best_subset_exact(a, c):
    """Exact minimum of phi(S, pi) over all 2^n subsets (unit-norm tuples)."""
    n = a.size
    asum, csum = float(np.sum(a)), float(np.sum(c))
    ss = _subset_sums(c - a)
    pc = _popcounts(n)
    cuts = asum + ss
    denom = np.minimum(asum + pc, csum + (n - pc))
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(denom > 0.0, cuts / denom, math.inf)
    phi = np.where(np.isnan(phi), math.inf, phi)
    best = int(np.argmin(phi))
    subset = tuple(i for i in range(n) if best >> i & 1)
    return float(phi[best]), subset


def _best_subset_sweep(a, c):
    """Threshold sweep over subsets ordered by projection mass.

    For unit-norm tuples the conductance denominator depends on S only
    through |S| and the numerator is minimized per cardinality by taking
    the samples with the largest ||pi v_i||^2, so this sweep is in fact
    exact; it is also the documented large-n path.
    """
    n = a.size
    asum, csum = float(np.sum(a)), float(np.sum(c))
    order = np.argsort(-a, kind="stable")
    prefw = np.concatenate([[0.0], np.cumsum((c - a)[order])])
    sizes = np.arange(n + 1)
    cuts = asum + prefw
    denom = np.minimum(asum + sizes, csum + (n - sizes))
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(denom > 0.0, cuts / denom, math.inf)
    phi = np.where(np.isnan(phi), math.inf, phi)
    best = int(np.argmin(phi))
    return float(phi[best]), tuple(sorted(int(i) for i in order[:best]))


def _orthonormal_span(rows):
    q, r = np.linalg.qr(rows.T)
    keep = np.abs(np.diag(r)) > 1e-10 * max(np.max(np.abs(r)), 1e-300)
    return q[:, keep]


def _candidate_projections(v, budget):
    """Deterministic candidate stream: eigenbasis cuts, sample spans, random."""
    x = v.vectors
    p, n = v.p, v.n
    max_rank = p // 2
    _, q = np.linalg.eigh(x.T @ x)
    count = sum(math.comb(p, k) for k in range(1, max_rank + 1))
    if count <= _EIGEN_SUBSET_CAP:
        for k in range(1, max_rank + 1):
            for cols in itertools.combinations(range(p), k):
                b = q[:, list(cols)]
                yield b @ b.T
    else:
        for k in range(1, max_rank + 1):
            for cols in (range(k), range(p - k, p)):
                b = q[:, list(cols)]
                yield b @ b.T
    emitted = 0
    for size in range(1, min(max_rank, budget.span_size) + 1):
        if emitted + math.comb(n, size) > _SPAN_CAP:
            break
        for rows in itertools.combinations(range(n), size):
            b = _orthonormal_span(x[list(rows)])
            if 0 < b.shape[1] <= max_rank:
                yield b @ b.T
            emitted += 1
    for k in range(1, max_rank + 1):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=budget.seed, spawn_key=(k,)))
        for _ in range(budget.random_count):
            g = rng.standard_normal((p, k))
            b = np.linalg.qr(g)[0]
            yield b @ b.T


def cheeger_upper_bound(v, budget=None):
    """Minimum conductance over a budgeted candidate family, with witness.

    The returned value is an upper bound on the true Cheeger constant
    (an infimum over all projections); the witness cut makes it
    falsifiable.  Enlarging the budget never increases the value.
    """
    v = _require_unit(v)
    budget = budget or CandidateBudget()
    if v.p < 2:
        return math.inf, None
    best_val, best_cut = math.inf, None
    optimizer = _best_subset_exact if v.n <= _EXACT_SUBSET_LIMIT else _best_subset_sweep
    for pi in _candidate_projections(v, budget):
        pi = (pi + pi.T) / 2.0
        a, c = _cut_masses(v.vectors, pi)
        val, subset = optimizer(a, c)
        if val < best_val:
            best_val = val
            best_cut = Cut(subset=subset, projection=pi)
        if best_val == 0.0:
            break
    return best_val, best_cut


def _bipartite_phi(row_sub_sum, vol_t, col_sub_sum, total):
    cut = vol_t + row_sub_sum
    vol1 = vol_t + col_sub_sum
    vol2 = 2.0 * total - vol_t - col_sub_sum
    denom = min(vol1, vol2)
    if denom <= 0.0:
        return math.inf
    return cut / denom


def bipartite_cheeger(b, exact_threshold=24, return_witness=False):
    """Cheeger constant of the weighted bipartite graph of a p' x n' matrix.

    Rows are the side constrained to |T| <= p'/2.  Exact enumeration over
    all (T, S) when p' + n' is at most ``exact_threshold``; beyond that a
    spectral sweep produces an upper bound.  Either way the returned
    witness makes the value checkable.
    """
    b = np.asarray(b, dtype=np.float64)
    if np.any(b < 0.0):
        raise ValueError("bipartite Cheeger needs a nonnegative matrix")
    pp, nn = b.shape
    total = float(np.sum(b))
    colsum = np.sum(b, axis=0)
    best = (math.inf, (), ())
    if pp + nn <= exact_threshold:
        for mask in range(1 << pp):
            t = [i for i in range(pp) if mask >> i & 1]
            if 2 * len(t) > pp:
                continue
            r_t = b[t].sum(axis=0) if t else np.zeros(nn)
            vol_t = float(np.sum(r_t))
            ss1 = _subset_sums(colsum - 2.0 * r_t)
            ss2 = _subset_sums(colsum)
            cuts = vol_t + ss1
            denom = np.minimum(vol_t + ss2, 2.0 * total - vol_t - ss2)
            with np.errstate(divide="ignore", invalid="ignore"):
                phi = np.where(denom > 0.0, cuts / denom, math.inf)
            phi = np.where(np.isnan(phi), math.inf, phi)
            idx = int(np.argmin(phi))
            if phi[idx] < best[0]:
                s = tuple(j for j in range(nn) if idx >> j & 1)
                best = (float(phi[idx]), tuple(t), s)
    else:
        rowsum = np.sum(b, axis=1)
        dr = np.where(rowsum > 0.0, 1.0 / np.sqrt(np.maximum(rowsum, 1e-300)), 0.0)
        dc = np.where(colsum > 0.0, 1.0 / np.sqrt(np.maximum(colsum, 1e-300)), 0.0)
        bn = b * dr[:, None] * dc[None, :]
        u = np.linalg.svd(bn)[0]
        score = u[:, 1] if u.shape[1] > 1 else u[:, 0]
        for order in (np.argsort(score, kind="stable"), np.argsort(-score, kind="stable")):
            for k in range(1, pp // 2 + 1):
                t = sorted(int(i) for i in order[:k])
                r_t = b[t].sum(axis=0)
                vol_t = float(np.sum(r_t))
                with np.errstate(divide="ignore", invalid="ignore"):
                    affinity = np.where(colsum > 0.0, r_t / colsum, 0.0)
                col_order = np.argsort(-affinity, kind="stable")
                w1 = (colsum - 2.0 * r_t)[col_order]
                w2 = colsum[col_order]
                cum1 = np.concatenate([[0.0], np.cumsum(w1)])
                cum2 = np.concatenate([[0.0], np.cumsum(w2)])
                for ell in range(nn + 1):
                    val = _bipartite_phi(cum1[ell], vol_t, cum2[ell], total)
                    if val < best[0]:
                        s = tuple(sorted(int(j) for j in col_order[:ell]))
                        best = (val, tuple(t), s)
    if return_witness:
        return best[0], (best[1], best[2])
    return best[0]
