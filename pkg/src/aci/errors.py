"""Exception hierarchy shared by all modules."""


class ACIError(Exception):
    """Base class for every error raised by this package."""


class InvalidPMF(ACIError):
    pass


class NegativeMass(InvalidPMF):
    pass


class SumNotOne(InvalidPMF):
    pass


class ShapeMismatch(InvalidPMF):
    pass


class RowNotNormalized(ShapeMismatch):
    pass


class UnknownName(ACIError):
    pass


class ParamOutOfRange(ACIError):
    pass


class SizeLimit(ACIError):
    pass


class TooManyCells(ACIError):
    pass


class TooLarge(ACIError):
    pass


class EmptyInput(ACIError):
    pass


class EmptySlice(ACIError):
    pass


class NotReached(ACIError):
    pass


class NoPositiveDirection(ACIError):
    pass


class DegenerateCovariance(ACIError):
    pass


class NoSolution(ACIError):
    pass


class StateCapExceeded(ACIError):
    pass


class InvalidProtocol(ACIError):
    pass
