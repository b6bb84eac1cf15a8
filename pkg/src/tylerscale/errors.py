"""Exception hierarchy shared by all tylerscale modules."""


class TylerScaleError(Exception):
    """Base class for all library errors."""


class NotPositiveDefinite(TylerScaleError):
    """A matrix required to be symmetric positive definite is not."""


class DimMismatch(TylerScaleError):
    """Operands have incompatible dimensions."""


class NotOrthogonal(TylerScaleError):
    """A matrix required to be orthogonal is not (within tolerance)."""


class RankTooLarge(TylerScaleError):
    """A projection exceeds the rank limit of the conductance definition."""


class SingularScaling(TylerScaleError):
    """A scaling factor is numerically singular."""


class SingularImage(TylerScaleError):
    """The image of the current iterate under the map is numerically singular.

    Signals non-scalability along a Sinkhorn trajectory.
    """


class BudgetExceeded(TylerScaleError):
    """A dense-spectral computation exceeds the configured size budget."""


class InsufficientData(TylerScaleError):
    """Not enough usable points for a statistical summary."""


class RoundedToZero(TylerScaleError):
    """Finite-precision rounding annihilated a sample vector."""


class AllZeroSample(TylerScaleError):
    """An input sample vector has zero norm."""


class InvalidArgument(TylerScaleError):
    """A command-line or API argument is out of its valid range."""


class ParseError(TylerScaleError):
    """An input file is malformed; the message cites the offending row."""


class CertificateViolation(TylerScaleError):
    """A computed quantity violates a bound it must satisfy exactly."""
