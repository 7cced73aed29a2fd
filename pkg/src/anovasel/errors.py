"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    pass


class EmptyEllipsoidError(ValueError):
    """The Sobolev ellipsoid with the central ball removed has no points."""


class OutOfRangeError(ValueError):
    pass


class NumericError(RuntimeError):
    pass


class ResourceLimitError(RuntimeError):
    pass


class MissingObservationError(LookupError):
    """A statistic needs a coordinate that was never realized."""
