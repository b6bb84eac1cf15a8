"""Completely positive maps between real symmetric matrix spaces.

Two representations are kept distinct.  ``DiagonalOutputMap`` is the
sample-built map ``Z -> diag(x_i^T Z x_i)`` whose output lives in the
n-dimensional space of diagonal matrices; keeping it special-cased makes
one application O(n p^2) and keeps spectral work n-dimensional.
``GeneralKrausMap`` is the generic form ``Z -> sum_i A_i Z A_i^T``.

``as_matrix`` produces the matrix of the map with respect to fixed
orthonormal bases (diagonal units ``E_ii`` first, then
``(E_ij + E_ji)/sqrt(2)`` for i < j in lexicographic order), so singular
values of the returned matrix are the singular values of the map.
"""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AllZeroSample, BudgetExceeded, DimMismatch, SingularScaling
from .linalg import op_norm_sym, require_symmetric, sym

Balancedness = namedtuple("Balancedness", ["left", "right", "eps"])


class VectorTuple:
    """A tuple of n nonzero sample vectors in R^p, one per row."""

    __slots__ = ("vectors",)

    def __init__(self, vectors):
        v = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DimMismatch(f"expected an (n, p) array, got shape {v.shape}")
        if np.any(~np.isfinite(v)):
            raise ValueError("sample vectors must be finite")
        if np.any(np.linalg.norm(v, axis=1) == 0.0):
            raise AllZeroSample("every sample vector must have positive norm")
        v = np.ascontiguousarray(v)
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)

    def __setattr__(self, name, value):
        raise AttributeError("VectorTuple is immutable")

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def p(self):
        return self.vectors.shape[1]

    def norms(self):
        return np.linalg.norm(self.vectors, axis=1)

    def unit_normalized(self):
        """Rescale every vector to unit norm."""
        return VectorTuple(self.vectors / self.norms()[:, None])

    def __repr__(self):
        return f"VectorTuple(n={self.n}, p={self.p})"


@dataclass(frozen=True)
class MatrixizationBudget:
    """Size limits for dense matrixization of a map.

    Defaults keep the SVD workload at desk scale; beyond them
    ``as_matrix`` refuses with ``BudgetExceeded`` rather than degrade.
    """

    max_p: int = 64
    max_diag_n: int = 4096
    max_kraus_n: int = 256


DEFAULT_BUDGET = MatrixizationBudget()


def sym_basis_dim(p):
    return p * (p + 1) // 2


def sym_coeffs(z):
    """Coefficients of a symmetric matrix in the orthonormal basis.

    The encoding is an isometry: the 2-norm of the coefficient vector is
    the Frobenius norm of the matrix.
    """
    z = np.asarray(z)
    p = z.shape[0]
    iu, ju = np.triu_indices(p, 1)
    return np.concatenate([np.diag(z), np.sqrt(2.0) * z[iu, ju]])


def coeffs_to_sym(c, p):
    """Inverse of :func:`sym_coeffs`."""
    z = np.zeros((p, p))
    z[np.diag_indices(p)] = c[:p]
    iu, ju = np.triu_indices(p, 1)
    z[iu, ju] = c[p:] / np.sqrt(2.0)
    z[ju, iu] = z[iu, ju]
    return z


def identity_coeffs(p):
    """Unit coefficient vector of I_p / sqrt(p)."""
    c = np.zeros(sym_basis_dim(p))
    c[:p] = 1.0 / np.sqrt(p)
    return c


def _check_scaling_factor(m, dim, what):
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (dim, dim):
        raise DimMismatch(f"{what} must be {dim}x{dim}, got shape {m.shape}")
    sign, logdet = np.linalg.slogdet(m)
    if sign == 0.0 or np.exp(logdet) < 1e-12:
        raise SingularScaling(f"{what} is numerically singular (|det| < 1e-12)")
    return m


class CPMap:
    """Common surface of both map representations."""

    in_dim: int
    out_dim: int

    def apply(self, z):
        raise NotImplementedError

    def apply_dual(self, w):
        raise NotImplementedError

    def size(self):
        """Size s = tr Phi(I_p)."""
        raise NotImplementedError

    def scale(self, l, r):
        raise NotImplementedError

    def as_matrix(self, budget=None):
        raise NotImplementedError

    def balancedness(self):
        """Left/right balance defects and their max.

        ``left = (n/s) ||Phi(I_p) - (s/n) I_n||_op`` and symmetrically for
        the dual; a map is eps-doubly balanced iff ``eps`` is at most eps.
        """
        n, p = self.out_dim, self.in_dim
        s = self.size()
        left = op_norm_sym(self.apply(np.eye(p)) - (s / n) * np.eye(n)) * n / s
        right = op_norm_sym(self.apply_dual(np.eye(n)) - (s / p) * np.eye(p)) * p / s
        return Balancedness(float(left), float(right), float(max(left, right)))

    def _check_input(self, z):
        z = require_symmetric(z, "input")
        if z.shape[0] != self.in_dim:
            raise DimMismatch(f"input has dim {z.shape[0]}, map expects {self.in_dim}")
        return z

    def _check_output_arg(self, w):
        w = require_symmetric(w, "dual input")
        if w.shape[0] != self.out_dim:
            raise DimMismatch(f"dual input has dim {w.shape[0]}, map expects {self.out_dim}")
        return w


class DiagonalOutputMap(CPMap):
    """The map ``Z -> diag(x_i^T Z x_i)`` built from a vector tuple."""

    def __init__(self, vectors):
        self.tuple = vectors if isinstance(vectors, VectorTuple) else VectorTuple(vectors)

    @property
    def in_dim(self):
        return self.tuple.p

    @property
    def out_dim(self):
        return self.tuple.n

    def apply_diag(self, z):
        """Diagonal of Phi(Z) as a length-n vector (hot path)."""
        return kernels.quad_forms(self.tuple.vectors, np.asarray(z, dtype=np.float64))

    def apply(self, z):
        return np.diag(self.apply_diag(self._check_input(z)))

    def apply_dual_diag(self, w):
        """Dual applied to diag(w): ``sum_i w_i x_i x_i^T`` (hot path)."""
        return kernels.weighted_scatter(self.tuple.vectors, np.asarray(w, dtype=np.float64))

    def apply_dual(self, w):
        return sym(self.apply_dual_diag(np.diag(self._check_output_arg(w))))

    def size(self):
        return float(np.sum(self.tuple.vectors**2))

    def balancedness(self):
        # Phi(I) is diagonal, so the left defect needs no eigensolve.
        n, p = self.out_dim, self.in_dim
        s = self.size()
        q = np.sum(self.tuple.vectors**2, axis=1)
        left = np.max(np.abs(q - s / n)) * n / s
        right = op_norm_sym(self.apply_dual_diag(np.ones(n)) - (s / p) * np.eye(p)) * p / s
        return Balancedness(float(left), float(right), float(max(left, right)))

    def scale(self, l, r):
        """Scaled map with vectors ``r_ii * (L x_i)``.

        ``r`` must be diagonal (an (n,) vector or a diagonal matrix) so the
        diagonal-output form is preserved.
        """
        l = _check_scaling_factor(l, self.in_dim, "L")
        r = np.asarray(r, dtype=np.float64)
        if r.ndim == 2:
            if r.shape != (self.out_dim, self.out_dim):
                raise DimMismatch(f"R must be {self.out_dim}x{self.out_dim}")
            d = np.diag(r)
            if np.linalg.norm(r - np.diag(d)) > 1e-12 * max(np.linalg.norm(d), 1e-300):
                raise DimMismatch("R must be diagonal for a diagonal-output map")
            r = d
        if r.shape != (self.out_dim,):
            raise DimMismatch(f"R must have {self.out_dim} diagonal entries")
        if np.any(r == 0.0) or np.exp(np.sum(np.log(np.abs(r)))) < 1e-12:
            raise SingularScaling("R is numerically singular (|det| < 1e-12)")
        return DiagonalOutputMap(self.tuple.vectors @ l.T * r[:, None])

    def as_matrix(self, budget=None):
        b = budget or DEFAULT_BUDGET
        if self.in_dim > b.max_p:
            raise BudgetExceeded(f"p = {self.in_dim} exceeds budget max_p = {b.max_p}")
        if self.out_dim > b.max_diag_n:
            raise BudgetExceeded(f"n = {self.out_dim} exceeds budget max_diag_n = {b.max_diag_n}")
        x = self.tuple.vectors
        iu, ju = np.triu_indices(self.in_dim, 1)
        return np.hstack([x**2, np.sqrt(2.0) * x[:, iu] * x[:, ju]])

    def out_coeffs(self, out_matrix):
        """Coefficients of an output matrix in the diagonal output basis."""
        return np.diag(np.asarray(out_matrix))


class GeneralKrausMap(CPMap):
    """The map ``Z -> sum_i A_i Z A_i^T`` for n x p Kraus operators."""

    def __init__(self, kraus):
        a = np.asarray(kraus, dtype=np.float64)
        if a.ndim == 2:
            a = a[None, :, :]
        if a.ndim != 3 or a.shape[0] < 1:
            raise DimMismatch("expected a sequence of n x p Kraus operators")
        if np.all(a == 0.0):
            raise ValueError("the zero map is not a valid completely positive map here")
        self.kraus = a

    @property
    def in_dim(self):
        return self.kraus.shape[2]

    @property
    def out_dim(self):
        return self.kraus.shape[1]

    def apply(self, z):
        z = self._check_input(z)
        out = np.zeros((self.out_dim, self.out_dim))
        for a in self.kraus:
            out += a @ z @ a.T
        return sym(out)

    def apply_dual(self, w):
        w = self._check_output_arg(w)
        out = np.zeros((self.in_dim, self.in_dim))
        for a in self.kraus:
            out += a.T @ w @ a
        return sym(out)

    def size(self):
        return float(np.sum(self.kraus**2))

    def scale(self, l, r):
        """Scaled map with Kraus operators ``R A_i L^T``."""
        l = _check_scaling_factor(l, self.in_dim, "L")
        r = _check_scaling_factor(r, self.out_dim, "R")
        return GeneralKrausMap(np.einsum("ab,ibc,dc->iad", r, self.kraus, l))

    def as_matrix(self, budget=None):
        b = budget or DEFAULT_BUDGET
        if self.in_dim > b.max_p:
            raise BudgetExceeded(f"p = {self.in_dim} exceeds budget max_p = {b.max_p}")
        if self.out_dim > b.max_kraus_n:
            raise BudgetExceeded(f"n = {self.out_dim} exceeds budget max_kraus_n = {b.max_kraus_n}")
        p = self.in_dim
        cols = []
        for i in range(p):
            e = np.zeros((p, p))
            e[i, i] = 1.0
            cols.append(sym_coeffs(self.apply(e)))
        for i, j in zip(*np.triu_indices(p, 1)):
            e = np.zeros((p, p))
            e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
            cols.append(sym_coeffs(self.apply(e)))
        return np.column_stack(cols)

    def out_coeffs(self, out_matrix):
        """Coefficients of an output matrix in the symmetric output basis."""
        return sym_coeffs(np.asarray(out_matrix))
