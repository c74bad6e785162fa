"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2), numerical
breakdowns from :class:`NumericalError` (exit code 3).
"""


class Ar2MaxError(Exception):
    pass


class InputError(Ar2MaxError, ValueError):
    pass


class NumericalError(Ar2MaxError, ArithmeticError):
    pass


class InvalidParameter(InputError):
    pass


class SignConditionViolated(InputError):
    pass


class NonStationary(InputError):
    pass


class ModeMismatch(InputError):
    pass


class InvalidInterval(InputError):
    pass


class GridTooLarge(InputError):
    pass


class BetaUndefined(InputError):
    pass


class UnsupportedKernelRegime(InputError):
    """The kernel has no bounded effective support (second coefficient <= 0)."""


class MismatchedThreshold(InputError):
    pass


class NonFiniteEntry(NumericalError):
    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = indices


class DefectiveOrIllConditioned(NumericalError):
    pass


class EigenvalueNearZero(NumericalError):
    pass


class ImaginaryResidueTooLarge(NumericalError):
    pass


class ComplexLeadingEigenvalue(NumericalError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair
