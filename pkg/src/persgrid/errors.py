"""Exception hierarchy shared by all submodules."""


class PersgridError(Exception):
    """Base class for all library errors."""

    #: machine-readable category used by the CLI diagnostics
    code = "error"

    def payload(self) -> dict:
        return {"error": self.code, "detail": str(self)}


class InputFormatError(PersgridError):
    code = "malformed-input"


class ShapeMismatch(PersgridError):
    code = "shape-mismatch"


class FieldMismatch(PersgridError):
    code = "field-mismatch"


class Singular(PersgridError):
    code = "singular"


class NotComparable(PersgridError):
    code = "not-comparable"


class NotInterval(PersgridError):
    code = "not-interval"


class NonMonotoneQuantization(PersgridError):
    code = "non-monotone-quantization"


class BudgetExceeded(PersgridError):
    code = "budget-exceeded"


class NonInvertibleArrow(PersgridError):
    code = "non-invertible-arrow"


class RegionNotConvex(PersgridError):
    code = "region-not-convex"


class Unreachable(PersgridError):
    code = "unreachable"


class UnsupportedDimension(PersgridError):
    code = "unsupported-dimension"


class NonConvexChamber(PersgridError):
    code = "non-convex-chamber"


class NonIsoWithinChamber(PersgridError):
    code = "non-iso-within-chamber"


class AntisymmetryViolation(PersgridError):
    code = "antisymmetry-violation"


class NoComparableWitness(PersgridError):
    code = "no-comparable-witness"


class WellDefinednessFailure(PersgridError):
    code = "well-definedness-failure"


class FunctorialityFailure(PersgridError):
    code = "functoriality-failure"


class NaturalityFailure(PersgridError):
    code = "naturality-failure"


class NotThin(PersgridError):
    code = "not-thin"


class CrossComponentNonzero(PersgridError):
    code = "cross-component-nonzero"


class NontrivialHolonomy(PersgridError):
    code = "nontrivial-holonomy"


class NotIntervalSupport(PersgridError):
    code = "not-interval-support"


class ZeroParameter(PersgridError):
    code = "zero-parameter"
