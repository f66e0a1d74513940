"""Exception hierarchy. Every error raised on purpose by the package derives
from :class:`ShiftApproxError`, which is a ``ValueError``."""


class ShiftApproxError(ValueError):
    pass


class InvalidResolution(ShiftApproxError):
    pass


class OutOfRange(ShiftApproxError):
    pass


class BalanceError(ShiftApproxError):
    pass


class StationarityError(ShiftApproxError):
    pass


class InsufficientDepth(ShiftApproxError):
    pass


class DenominatorTooSmall(ShiftApproxError):
    pass


class ConnectivityError(ShiftApproxError):
    def __init__(self, message, components=()):
        super().__init__(message)
        self.components = components


class MalformedSequence(ShiftApproxError):
    pass


class ClosureError(ShiftApproxError):
    pass


class InvalidBound(ShiftApproxError):
    pass


class MissingModulus(ShiftApproxError):
    pass


class ArityError(ShiftApproxError):
    pass


class EmptySegment(ShiftApproxError):
    pass


class InsufficientLevels(ShiftApproxError):
    def __init__(self, message, best_epsilon=None):
        super().__init__(message)
        self.best_epsilon = best_epsilon


class NoCover(ShiftApproxError):
    def __init__(self, message, positions=()):
        super().__init__(message)
        self.positions = positions
