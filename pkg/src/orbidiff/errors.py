"""Exception types shared across the package."""


class OrbidiffError(Exception):
    """Base class for all package errors."""


class NotOrthogonal(OrbidiffError):
    """A supplied matrix is not orthogonal within tolerance."""


class ClosureExceeded(OrbidiffError):
    """Group enumeration passed the supplied order bound."""


class SampleOutOfChart(OrbidiffError):
    """A sample point lies outside the chart it was offered to."""


class RadiusTooLarge(OrbidiffError):
    """Requested chart radius violates the orbit-separation bound."""


class UnsupportedModel(OrbidiffError):
    """Operation is not defined for this model space kind."""


class EquivarianceViolation(OrbidiffError):
    """Lift and homomorphism data fail the equivariance relation."""


class AtlasNotCovering(OrbidiffError):
    """The chart atlas leaves part of the orbifold uncovered."""


class ImageEscapesChart(OrbidiffError):
    """A map image leaves the target chart or model domain."""


class BranchAmbiguity(OrbidiffError):
    """Two continuation branches are too close to separate reliably."""


class ChartMismatch(OrbidiffError):
    """No single target chart accommodates a composite lift."""


class NotDifferentiable(OrbidiffError):
    """No admissible differentiable concatenation at the queried time."""


class CoverGap(OrbidiffError):
    """Partition-of-unity weights vanish somewhere on the grid."""


class NotSPD(OrbidiffError):
    """A metric value is not symmetric positive definite."""


class OutOfDomain(OrbidiffError):
    """Exponential-map input outside its injectivity-scale domain."""


class NotCloseToIdentity(OrbidiffError):
    """Map is too far from the identity for chart inversion."""


class ThetaNotIdentity(OrbidiffError):
    """Chart homomorphism is not the identity where required."""


class ConfigInvalid(OrbidiffError):
    """Suite configuration failed validation."""
