"""Exception hierarchy shared by all modules."""


class GrowthError(Exception):
    """Base class for every error raised by this package."""


class TruncationUnavailable(GrowthError):
    """No admissible truncation index exists at the requested radius."""


class InsufficientSamples(GrowthError):
    pass


class UndefinedForZeroOrder(GrowthError):
    pass


class UndefinedForZeroLowerOrder(GrowthError):
    pass


class InsufficientExponents(GrowthError):
    pass


class FitRejected(GrowthError):
    pass


class SeedTooSmall(GrowthError):
    """The sequence seed lies below the growth fixed point (sequence not increasing)."""


class NotFound(GrowthError):
    pass


class EvaluationFailed(GrowthError):
    pass


class NotSatisfiedOnGrid(GrowthError):
    """An eventually-true inequality never settles on the scanned grid.

    ``table`` carries the full per-radius (or per-index) evidence and
    ``witness`` the largest violating point.
    """

    def __init__(self, message, table=None, witness=None):
        super().__init__(message)
        self.table = table
        self.witness = witness
