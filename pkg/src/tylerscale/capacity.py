"""Capacity objective, geodesic gradient, and curvature certificates.

The objective is ``f(Z) = (p/n) log det Phi(Z) - log det Z`` on positive
definite Z.  It is invariant under positive rescaling of Z, geodesically
convex, and its geodesic gradient vanishes exactly at Sinkhorn fixed
points.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import expander
from .cpmap import DiagonalOutputMap
from .errors import CertificateViolation, DimMismatch, SingularImage
from .kernels import quad_forms
from .linalg import mat_sqrt, normalize, pd_entries, require_symmetric, sym

_SINGULAR_FLOOR = 1e-300


def _image_log_eigs(phi, z):
    """Eigenvalues of Phi(Z), as logs; raises when the image degenerates."""
    if isinstance(phi, DiagonalOutputMap):
        w = phi.apply_diag(z)
    else:
        w = np.linalg.eigvalsh(phi.apply(z))
    if np.min(w) <= _SINGULAR_FLOOR:
        raise SingularImage("Phi(Z) is numerically singular (capacity-zero signal)")
    return np.log(w)


def f_value(phi, z):
    """Capacity objective ``(p/n) log det Phi(Z) - log det Z``."""
    zm = pd_entries(z)
    if zm.shape[0] != phi.in_dim:
        raise DimMismatch(f"Z has dim {zm.shape[0]}, map expects {phi.in_dim}")
    n, p = phi.out_dim, phi.in_dim
    log_img = _image_log_eigs(phi, zm)
    return float(p / n * np.sum(log_img) - np.sum(np.log(np.linalg.eigvalsh(zm))))


def _dual_of_inverse_image(phi, z):
    """M = Phi^*(Phi(Z)^{-1})."""
    if isinstance(phi, DiagonalOutputMap):
        q = phi.apply_diag(z)
        if np.min(q) <= _SINGULAR_FLOOR:
            raise SingularImage("Phi(Z) is numerically singular")
        return phi.apply_dual_diag(1.0 / q)
    img = phi.apply(z)
    w, v = np.linalg.eigh(img)
    if np.min(w) <= _SINGULAR_FLOOR:
        raise SingularImage("Phi(Z) is numerically singular")
    return phi.apply_dual(sym((v / w) @ v.T))


def geodesic_gradient(phi, z):
    """Geodesic gradient ``(p/n) sqrt(Z) Phi^*(Phi(Z)^{-1}) sqrt(Z) - I``."""
    zm = pd_entries(z)
    if zm.shape[0] != phi.in_dim:
        raise DimMismatch(f"Z has dim {zm.shape[0]}, map expects {phi.in_dim}")
    n, p = phi.out_dim, phi.in_dim
    r = mat_sqrt(zm).entries
    m = _dual_of_inverse_image(phi, zm)
    return sym(p / n * (r @ m @ r)) - np.eye(p)


def _require_traceless(x):
    xs = require_symmetric(x, "direction")
    scale = max(np.linalg.norm(xs), 1.0)
    if abs(np.trace(xs)) > 1e-8 * scale:
        raise DimMismatch("direction must be traceless")
    return xs


def _curvature_terms(phi, x):
    """tr P^{-1} Phi(X^2) - tr P^{-1} Phi(X) P^{-1} Phi(X) at P = Phi(I)."""
    if isinstance(phi, DiagonalOutputMap):
        y = phi.tuple.vectors
        q = np.sum(y**2, axis=1)
        xy = y @ x
        t1 = float(np.sum(np.sum(xy**2, axis=1) / q))
        t2 = float(np.sum(quad_forms(y, x) ** 2 / q**2))
        return t1 - t2
    p_img = phi.apply(np.eye(phi.in_dim))
    w, v = np.linalg.eigh(p_img)
    if np.min(w) <= _SINGULAR_FLOOR:
        raise SingularImage("Phi(I) is numerically singular")
    p_inv = sym((v / w) @ v.T)
    a = phi.apply(sym(x @ x))
    bmat = phi.apply(x)
    t1 = float(np.trace(p_inv @ a))
    t2 = float(np.trace(p_inv @ bmat @ p_inv @ bmat))
    return t1 - t2


def second_directional(phi, z, x):
    """Second derivative of f along the geodesic through Z in direction X.

    The base point is transported to the identity by scaling the map with
    sqrt(Z): curvature of f at Z equals curvature of the scaled map at I.
    Always nonnegative up to roundoff (geodesic convexity).
    """
    xs = _require_traceless(x)
    zd = normalize(z, "det_1").entries
    if zd.shape[0] != phi.in_dim:
        raise DimMismatch(f"Z has dim {zd.shape[0]}, map expects {phi.in_dim}")
    r = mat_sqrt(zd).entries
    if isinstance(phi, DiagonalOutputMap):
        scaled = phi.scale(r, np.ones(phi.out_dim))
    else:
        scaled = phi.scale(r, np.eye(phi.out_dim))
    n, p = phi.out_dim, phi.in_dim
    return p / n * _curvature_terms(scaled, xs)


@dataclass(frozen=True)
class ConvexityCertificate:
    """Sampled curvature of log det Phi(e^{tX}) against its exact lower bound.

    Both numbers are on the log-det scale, where the bound reads
    ``(n/p) ((1+eps)^{-1}(1-eps) - (1-lam)^2 (1-eps)^{-1})`` with the
    measured balance defect and expansion of the map.
    """

    sampled_min: float
    analytic_bound: float
    eps: float
    lam: float


def strong_convexity_certificate(phi, trials, seed=0, budget=None):
    """Sample geodesic curvature at the origin and check the expansion bound.

    Draws ``trials`` random unit-norm traceless directions, computes the
    exact second derivative of ``log det Phi(e^{tX})`` at t = 0 for each,
    and verifies the minimum dominates the analytic bound derived from the
    measured (eps, lambda) of the map.  Raises ``CertificateViolation`` if
    the bound fails by more than 1e-8.  For p = 1 the traceless space is
    empty and the sampled minimum is vacuously +inf.
    """
    n, p = phi.out_dim, phi.in_dim
    report = expander.expansion_constant(phi, budget)
    eps, lam = report.eps, report.lam
    if eps < 1.0:
        bound = n / p * ((1.0 - eps) / (1.0 + eps) - (1.0 - lam) ** 2 / (1.0 - eps))
    else:
        bound = -math.inf
    if p == 1:
        return ConvexityCertificate(math.inf, bound, eps, lam)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    sampled = math.inf
    for _ in range(int(trials)):
        g = sym(rng.standard_normal((p, p)))
        g -= np.trace(g) / p * np.eye(p)
        g /= np.linalg.norm(g)
        sampled = min(sampled, _curvature_terms(phi, g))
    if sampled < bound - 1e-8:
        raise CertificateViolation(
            f"sampled curvature {sampled:.3e} fell below the expansion bound {bound:.3e}"
        )
    return ConvexityCertificate(float(sampled), float(bound), eps, lam)
