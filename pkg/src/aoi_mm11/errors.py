"""Exception and warning types shared across the package."""


class NonPositiveRate(ValueError):
    """An arrival or service rate is not a finite positive number."""


class EmptySourceList(ValueError):
    """A model needs at least one source."""


class IndexOutOfRange(IndexError):
    """Source index k outside 1..K."""


class NegativeTransformArgument(ValueError):
    """Laplace-Stieltjes transforms are only evaluated at s >= 0."""


class NegativeTime(ValueError):
    """Ages and densities are only defined for t >= 0."""


class RequiresTwoSources(ValueError):
    """Joint quantities (cross moment, correlation) are defined for K = 2 only."""


class EmptyWindow(ValueError):
    """The measurement window contains no complete update interval."""


class InsufficientSamples(ValueError):
    """Too few samples for the requested distributional check."""


class InsufficientReplications(ValueError):
    """At least one replication is required."""


class HorizonTooSmall(UserWarning):
    """A simulated horizon left some source without a usable update window."""
