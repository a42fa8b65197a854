"""Exception hierarchy.

Every error raised on purpose by the package derives from `HardyLabError`.
Errors that signal a violated precondition on the inputs (a point outside the
domain, a Bessel pair whose interval is too short, ...) additionally derive
from `PreconditionError`; the command line maps those to exit code 3.
"""


class HardyLabError(Exception):
    pass


class PreconditionError(HardyLabError):
    pass


class SchemaError(HardyLabError, ValueError):
    """Malformed JSON descriptor (unknown field, wrong type, missing key)."""


# geometry
class PointOutsideDomain(PreconditionError):
    pass


class OnSkeleton(PreconditionError):
    pass


class OnCutLocus(PreconditionError):
    pass


class NonSmoothBoundaryPoint(PreconditionError):
    pass


class NoCutLocusDescriptor(PreconditionError):
    pass


# bessel
class ExponentOutOfRange(PreconditionError):
    pass


class DegenerateExponent(PreconditionError):
    pass


class LambdaOutOfRange(PreconditionError):
    pass


class OutOfInterval(PreconditionError):
    pass


# mean distance
class InvalidGammaArgument(PreconditionError):
    pass


class UnboundedSupremum(PreconditionError):
    pass


class RhoExceedsPairInterval(PreconditionError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


# identities
class PairIntervalTooShort(PreconditionError):
    pass


class EssentialDiameterTooLarge(PreconditionError):
    pass


class DimensionTooSmall(PreconditionError):
    pass


# spectral
class GridTooCoarse(PreconditionError):
    pass


class InfiniteEssentialDiameter(PreconditionError):
    pass


class UnsupportedDomain(PreconditionError):
    """The eigenvalue solver has no discretization for this domain."""

    pass


class BoundViolation(HardyLabError):
    """An ordering between spectral quantities failed; indicates a bug."""
