"""Sinkhorn iteration engine with convergence tracing.

One step maps Z to the inverse of ``(p/n) Phi^*(Phi(Z)^{-1})``; fixed
points coincide with zeros of the geodesic gradient of the capacity
objective.  Runs stop on the gradient norm (the scale-invariant progress
measure), on divergence (condition number past 1e14, or a singular
image), or on the iteration cap.  Recorded iterates are renormalized to
unit determinant; the objective and its gradient are unchanged by that.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels
from .cpmap import DiagonalOutputMap
from .errors import InsufficientData, InvalidArgument, SingularImage
from .linalg import PDMatrix, pd_entries, sym

_COND_LIMIT = 1e14
_SINGULAR_FLOOR = 1e-300
# Iterates safely constructible as PDMatrix values (floor 1e-12 with margin).
_RETURNABLE_COND = 1e11


class RunStatus(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class IterationRecord:
    index: int
    f_value: float
    grad_norm: float
    step_distance: float


@dataclass(frozen=True)
class ConvergenceTrace:
    """Per-iteration objective, gradient norm, and iterate movement."""

    iterations: tuple
    status: RunStatus

    def __len__(self):
        return len(self.iterations)

    def f_values(self):
        return np.array([r.f_value for r in self.iterations])

    def grad_norms(self):
        return np.array([r.grad_norm for r in self.iterations])

    @property
    def final(self):
        return self.iterations[-1]


def _eval_state(phi, z):
    """f, gradient matrix, and M = Phi^*(Phi(Z)^{-1}) at a raw iterate."""
    n, p = phi.out_dim, phi.in_dim
    w, v = np.linalg.eigh(z)
    if w[0] <= 0.0:
        raise SingularImage("iterate lost positive definiteness")
    if isinstance(phi, DiagonalOutputMap):
        q, m = kernels.step_stats(phi.tuple.vectors, z)
        if np.min(q) <= _SINGULAR_FLOOR:
            raise SingularImage("Phi(Z) is numerically singular")
        log_img = np.log(q)
    else:
        img = phi.apply(z)
        wi, vi = np.linalg.eigh(img)
        if np.min(wi) <= _SINGULAR_FLOOR:
            raise SingularImage("Phi(Z) is numerically singular")
        log_img = np.log(wi)
        m = phi.apply_dual(sym((vi / wi) @ vi.T))
    f = float(p / n * np.sum(log_img) - np.sum(np.log(w)))
    root = (v * np.sqrt(w)) @ v.T
    grad = sym(p / n * (root @ m @ root)) - np.eye(p)
    cond = w[-1] / w[0]
    z_norm = z * math.exp(-float(np.mean(np.log(w))))
    return f, grad, m, cond, z_norm


def _step_from_dual(m, p, n):
    zn = np.linalg.inv(p / n * m)
    return sym(zn)


def step(phi, z):
    """One Sinkhorn step: the inverse of ``(p/n) Phi^*(Phi(Z)^{-1})``."""
    zm = pd_entries(z)
    try:
        _, _, m, _, _ = _eval_state(phi, zm)
        out = _step_from_dual(m, phi.in_dim, phi.out_dim)
        return PDMatrix(out)
    except np.linalg.LinAlgError as exc:
        raise SingularImage("Sinkhorn step hit a singular dual image") from exc


def _log_distance_raw(a, b):
    try:
        mu = scipy.linalg.eigh(b, a, eigvals_only=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
        return math.nan
    if np.min(mu) <= 0.0:
        return math.nan
    return float(np.sqrt(np.sum(np.log(mu) ** 2)))


def run(phi, z0=None, tol=1e-8, max_iters=10000):
    """Iterate from Z0 (default identity) until the gradient norm is small.

    Returns ``(iterate, trace)``.  The returned iterate is the
    determinant-normalized recorded iterate with the smallest gradient
    norm among those that stayed numerically well conditioned; on a
    converged run that is the final iterate.
    """
    if tol <= 0.0:
        raise InvalidArgument("tol must be positive")
    if max_iters < 0:
        raise InvalidArgument("max_iters must be nonnegative")
    p = phi.in_dim
    z = np.eye(p) if z0 is None else pd_entries(z0).copy()
    records = []
    status = RunStatus.MAX_ITERS
    best_grad, best_z = math.inf, None
    prev_norm = None
    t = 0
    while True:
        try:
            f, grad, m, cond, z_norm = _eval_state(phi, z)
        except (SingularImage, np.linalg.LinAlgError):
            status = RunStatus.DIVERGED
            break
        grad_norm = float(np.linalg.norm(grad))
        dist = 0.0 if prev_norm is None else _log_distance_raw(prev_norm, z_norm)
        records.append(IterationRecord(t, f, grad_norm, dist))
        if cond <= _RETURNABLE_COND and grad_norm < best_grad:
            best_grad, best_z = grad_norm, z_norm
        if grad_norm <= tol:
            status = RunStatus.CONVERGED
            break
        if cond > _COND_LIMIT:
            status = RunStatus.DIVERGED
            break
        if t >= max_iters:
            status = RunStatus.MAX_ITERS
            break
        try:
            z_next = _step_from_dual(m, p, phi.out_dim)
        except np.linalg.LinAlgError:
            status = RunStatus.DIVERGED
            break
        prev_norm = z_norm
        z = z_next
        # The step is 1-homogeneous, so rescaling only guards against
        # floating-point overflow on divergent trajectories.
        tr = np.trace(z)
        if not (1e-100 < tr < 1e100):
            z = z * (p / tr)
        t += 1
    if best_z is None:
        best_z = np.eye(p)
    trace = ConvergenceTrace(iterations=tuple(records), status=status)
    return PDMatrix(best_z, "det_1"), trace


def verify_progress(trace, slack=1e-9):
    """Check monotone descent and the per-step progress inequality.

    True iff f never increases and, whenever the gradient norm is at most
    one, the next value drops by at least one sixth of its square (up to
    ``slack``).
    """
    f = trace.f_values()
    g = trace.grad_norms()
    for t in range(len(f) - 1):
        if f[t + 1] > f[t] + slack:
            return False
        if g[t] <= 1.0 and f[t + 1] > f[t] - g[t] ** 2 / 6.0 + slack:
            return False
    return True


def linear_rate_estimate(trace, tail_fraction=0.5):
    """Least-squares slope and R^2 of log grad norm over the trace tail."""
    if not 0.0 < tail_fraction <= 1.0:
        raise InvalidArgument("tail_fraction must be in (0, 1]")
    records = trace.iterations
    tail = records[len(records) - max(1, math.ceil(len(records) * tail_fraction)):]
    pts = [(r.index, math.log(r.grad_norm)) for r in tail if r.grad_norm > 0.0]
    if len(pts) < 10:
        raise InsufficientData(f"need at least 10 positive-gradient tail points, have {len(pts)}")
    x = np.array([t for t, _ in pts], dtype=np.float64)
    y = np.array([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot < 1e-30:
        r2 = 1.0 if ss_res < 1e-30 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(r2)
