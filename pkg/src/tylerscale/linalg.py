"""Dense symmetric/positive-definite primitives shared by every module.

Matrices are dense float64.  Symmetry is enforced by explicit
symmetrization after every product chain; operator norms and matrix
functions go through symmetric eigendecompositions rather than iterative
methods, trading speed for exactness at desk scale (dimensions up to a
few hundred).

``PDMatrix`` wraps a validated positive definite matrix together with a
normalization tag.  Plain symmetric matrices (geodesic directions,
gradients) are passed around as bare ndarrays.
"""

import numpy as np
import scipy.linalg

from .errors import DimMismatch, NotPositiveDefinite

TAGS = ("raw", "trace_p", "det_1")

# Relative tolerances: symmetry drift, PD eigenvalue floor, tag defect.
SYM_RTOL = 1e-12
PD_RTOL = 1e-12
TAG_TOL = 1e-9


def sym(m):
    """Symmetrize: (M + M^T)/2, killing floating-point drift."""
    return (m + m.T) / 2.0


def op_norm_sym(m):
    """Operator norm of a symmetric matrix via eigendecomposition."""
    if m.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(m))))


class PDMatrix:
    """Symmetric positive definite matrix with a normalization tag.

    Construction validates symmetry (relative Frobenius defect at most
    1e-12), positive definiteness (smallest eigenvalue above
    ``1e-12 * ||A||_op``; anything below makes the inverse numerically
    meaningless in double precision) and, when tagged, the normalization:
    ``trace_p`` means trace equal to the dimension, ``det_1`` means unit
    determinant.  The stored entries are symmetrized and frozen.
    """

    __slots__ = ("entries", "normalization")

    def __init__(self, entries, normalization="raw"):
        a = np.asarray(entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
        if normalization not in TAGS:
            raise ValueError(f"unknown normalization tag {normalization!r}")
        scale = np.linalg.norm(a)
        if scale > 0 and np.linalg.norm(a - a.T) > SYM_RTOL * scale:
            raise NotPositiveDefinite("matrix is not symmetric")
        a = sym(a)
        w = np.linalg.eigvalsh(a)
        top = np.max(np.abs(w)) if a.size else 0.0
        if top <= 0.0 or w[0] <= PD_RTOL * top:
            raise NotPositiveDefinite(
                f"matrix is not positive definite (min eigenvalue {w[0] if a.size else 0.0:.3e})"
            )
        p = a.shape[0]
        if normalization == "trace_p" and abs(np.trace(a) - p) > TAG_TOL * p:
            raise NotPositiveDefinite(f"trace_p tag violated: trace = {np.trace(a)!r}")
        if normalization == "det_1" and abs(np.sum(np.log(w))) > TAG_TOL:
            raise NotPositiveDefinite(f"det_1 tag violated: log det = {np.sum(np.log(w))!r}")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "normalization", normalization)

    def __setattr__(self, name, value):
        raise AttributeError("PDMatrix is immutable")

    @property
    def dim(self):
        return self.entries.shape[0]

    def __repr__(self):
        return f"PDMatrix(dim={self.dim}, normalization={self.normalization!r})"


def pd_entries(a):
    """Entries of a PDMatrix, or a validated copy of a raw PD array."""
    if isinstance(a, PDMatrix):
        return a.entries
    return PDMatrix(a).entries


def mat_sqrt(a):
    """Symmetric PD square root, ``R R = A`` to 1e-10 relative."""
    m = pd_entries(a)
    w, v = np.linalg.eigh(m)
    return PDMatrix(sym((v * np.sqrt(w)) @ v.T))


def _error_spectrum(a, b):
    """Eigenvalues of A^{1/2} B^{-1} A^{1/2} via the pencil (A, B).

    The generalized symmetric problem ``A x = mu B x`` yields the spectrum
    of ``B^{-1} A``, which coincides with that of ``A^{1/2} B^{-1} A^{1/2}``;
    this avoids forming a matrix square root.
    """
    ma, mb = pd_entries(a), pd_entries(b)
    if ma.shape != mb.shape:
        raise DimMismatch(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return scipy.linalg.eigh(ma, mb, eigvals_only=True)


def error_op(a, b):
    """Operator-norm error ``||I - A^{1/2} B^{-1} A^{1/2}||_op``."""
    return float(np.max(np.abs(1.0 - _error_spectrum(a, b))))


def error_frob(a, b):
    """Frobenius (Mahalanobis) error ``||I - A^{1/2} B^{-1} A^{1/2}||_F``."""
    return float(np.sqrt(np.sum((1.0 - _error_spectrum(a, b)) ** 2)))


def normalize(a, target):
    """Rescale a PD matrix to the requested normalization tag.

    ``trace_p`` divides by trace/p, ``det_1`` by det^{1/p}; ``raw`` is a
    retag without rescaling.
    """
    m = pd_entries(a)
    if target == "raw":
        return PDMatrix(m, "raw")
    p = m.shape[0]
    if target == "trace_p":
        return PDMatrix(m * (p / np.trace(m)), "trace_p")
    if target == "det_1":
        w = np.linalg.eigvalsh(m)
        return PDMatrix(m * np.exp(-np.sum(np.log(w)) / p), "det_1")
    raise ValueError(f"unknown normalization tag {target!r}")


def require_symmetric(x, what="matrix"):
    """Validate and return the symmetrized version of a symmetric array."""
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"{what} must be square, got shape {m.shape}")
    scale = np.linalg.norm(m)
    if scale > 0 and np.linalg.norm(m - m.T) > 1e-10 * scale:
        raise DimMismatch(f"{what} is not symmetric")
    return sym(m)


def expm_sym(x):
    """Matrix exponential of a symmetric matrix via eigendecomposition."""
    w, v = np.linalg.eigh(x)
    return sym((v * np.exp(w)) @ v.T)


def logm_pd(a):
    """Matrix logarithm of a PD matrix."""
    m = pd_entries(a)
    w, v = np.linalg.eigh(m)
    return sym((v * np.log(w)) @ v.T)


def geodesic_point(z, x, t):
    """Point ``sqrt(Z) exp(tX) sqrt(Z)`` on the geodesic through Z along X."""
    r = mat_sqrt(z).entries
    xs = require_symmetric(x, "direction")
    return PDMatrix(sym(r @ expm_sym(t * xs) @ r))


def geodesic_log_distance(a, b):
    """Affine-invariant distance ``||log(A^{-1/2} B A^{-1/2})||_F``."""
    ma, mb = pd_entries(a), pd_entries(b)
    if ma.shape != mb.shape:
        raise DimMismatch(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    mu = scipy.linalg.eigh(mb, ma, eigvals_only=True)
    return float(np.sqrt(np.sum(np.log(mu) ** 2)))
