"""Exception hierarchy shared by all isoclass modules."""


class IsoclassError(Exception):
    """Base class for domain errors raised by this package."""


class NonMonicError(IsoclassError):
    pass


class ZeroConstantTermError(IsoclassError):
    pass


class ExcludedRootError(IsoclassError):
    pass


class ZeroPolynomialError(IsoclassError):
    pass


class ReducibleError(IsoclassError):
    pass


class DimensionMismatchError(IsoclassError):
    pass


class DegenerateFormError(IsoclassError):
    pass


class NotSymmetricError(IsoclassError):
    pass


class SingularMatrixError(IsoclassError):
    pass


class NotPrimaryError(IsoclassError):
    pass


class NotFreeError(IsoclassError):
    """Internal: a module expected to be free over its algebra is not."""


class SingularSystemError(IsoclassError):
    """Internal: the linear system defining an induced form is singular."""


class NotUnimodularError(IsoclassError):
    pass


class AlgebraMismatchError(IsoclassError):
    pass


class TooLargeError(IsoclassError):
    pass


class SearchExhaustedError(IsoclassError):
    pass


class SpaceMismatchError(IsoclassError):
    pass


class NotConjugateError(IsoclassError):
    pass


class WitnessUnavailableError(IsoclassError):
    pass


class OutOfRangeError(IsoclassError):
    pass
