"""Exception hierarchy.

Every error is a ``ValueError`` so callers that only care about bad input can
catch that.  Errors that signal an unsuitable numerical regime (rather than a
malformed argument) additionally derive from :class:`NumericRegimeError`; the
CLI maps those to exit code 3.
"""


class PointerStateError(ValueError):
    """Base class for all package errors."""


class NumericRegimeError(PointerStateError):
    """The inputs are well-formed but outside the regime the method covers."""


class NonHermitianInput(PointerStateError):
    pass


class BranchAmbiguity(NumericRegimeError):
    """An eigenphase sits on the branch cut of the principal logarithm."""

    hint = "reduce the pulse interval tau so that T_c * ||H_c|| < pi"


class DimensionMismatch(PointerStateError):
    pass


class DimensionTooLarge(PointerStateError):
    pass


class NotPureInitial(PointerStateError):
    pass


class NotNormalized(PointerStateError):
    pass


class BasisNotOrthonormal(PointerStateError):
    pass


class BadP(PointerStateError):
    pass


class CycleNotClosed(PointerStateError):
    pass


class UnknownName(PointerStateError):
    pass


class RNotInvolution(PointerStateError):
    pass


class MissingErrorEntry(PointerStateError):
    pass


class EmptyTrajectory(PointerStateError):
    pass


class InvalidDensity(PointerStateError):
    pass


class ZeroGap(NumericRegimeError):
    """Degenerate pointer sectors; desymmetrize the cycle before bounding."""


class RegimeViolation(NumericRegimeError):
    pass


class ZeroSplitting(NumericRegimeError):
    pass


class ConfigInvalid(PointerStateError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class InsufficientPoints(PointerStateError):
    pass
