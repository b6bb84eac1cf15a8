"""Shape-matrix estimation by operator scaling.

Estimates the shape matrix of an elliptical distribution through the
fixed-point iteration that doubly balances the sample-built completely
positive map, and ships the exact spectral diagnostics (balance defect,
quantum expansion, spectral gap, Cheeger conductance) that explain when
and how fast the iteration converges.
"""

from .capacity import (
    ConvexityCertificate,
    f_value,
    geodesic_gradient,
    second_directional,
    strong_convexity_certificate,
)
from .cpmap import (
    Balancedness,
    CPMap,
    DiagonalOutputMap,
    GeneralKrausMap,
    MatrixizationBudget,
    VectorTuple,
)
from .expander import (
    CandidateBudget,
    Cut,
    ExpansionReport,
    b_matrix,
    bipartite_cheeger,
    cheeger_upper_bound,
    conductance,
    expansion_constant,
    spectral_gap,
)
from .linalg import (
    PDMatrix,
    error_frob,
    error_op,
    geodesic_log_distance,
    geodesic_point,
    mat_sqrt,
    normalize,
)
from .sampling import (
    EllipticalSpec,
    UDist,
    coordinate_mass_moment,
    covariance_concentration,
    haar_unit,
    round_bits,
    sample_elliptical,
    stream_rng,
)
from .sinkhorn import (
    ConvergenceTrace,
    IterationRecord,
    RunStatus,
    linear_rate_estimate,
    run,
    step,
    verify_progress,
)
from .tyler import (
    EstimateResult,
    ExistenceVerdict,
    VerdictStatus,
    Witness,
    conjugate_estimate,
    estimate,
    existence_check,
    residual,
    scaled_operator,
)

__version__ = "0.1.0"

__all__ = [
    "Balancedness",
    "CPMap",
    "CandidateBudget",
    "ConvergenceTrace",
    "ConvexityCertificate",
    "Cut",
    "DiagonalOutputMap",
    "EllipticalSpec",
    "EstimateResult",
    "ExistenceVerdict",
    "ExpansionReport",
    "GeneralKrausMap",
    "IterationRecord",
    "MatrixizationBudget",
    "PDMatrix",
    "RunStatus",
    "UDist",
    "VectorTuple",
    "VerdictStatus",
    "Witness",
    "b_matrix",
    "bipartite_cheeger",
    "cheeger_upper_bound",
    "conductance",
    "conjugate_estimate",
    "coordinate_mass_moment",
    "covariance_concentration",
    "error_frob",
    "error_op",
    "estimate",
    "existence_check",
    "expansion_constant",
    "f_value",
    "geodesic_gradient",
    "geodesic_log_distance",
    "geodesic_point",
    "haar_unit",
    "linear_rate_estimate",
    "mat_sqrt",
    "normalize",
    "residual",
    "round_bits",
    "run",
    "sample_elliptical",
    "scaled_operator",
    "second_directional",
    "spectral_gap",
    "step",
    "stream_rng",
    "strong_convexity_certificate",
    "verify_progress",
]
