"""Exception types raised by geninfo.

Everything derives from ``GeninfoError`` (itself a ``ValueError``) so callers
can catch the whole family at once.
"""


class GeninfoError(ValueError):
    pass


class DegenerateWeightsError(GeninfoError):
    pass


class InvalidWeightError(GeninfoError):
    pass


class UndefinedPriorError(GeninfoError):
    pass


class AbsoluteContinuityError(GeninfoError):
    pass


class NullLogicalProbabilityError(GeninfoError):
    pass


class InvalidWidthError(GeninfoError):
    pass


class ClosedFormUnavailableError(GeninfoError):
    pass


class NoAdmissibleCandidateError(GeninfoError):
    pass


class InvalidSlopeError(GeninfoError):
    pass


class InfeasibleFidelityTargetError(GeninfoError):
    pass


class MatchingPointOutsideSweepError(GeninfoError):
    """Raised when a curve does not bracket the R = G tangency.

    ``closest`` holds the curve point with the smallest R - G gap.
    """

    def __init__(self, message, closest=None):
        super().__init__(message)
        self.closest = closest
