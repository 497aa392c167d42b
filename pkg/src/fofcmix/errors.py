"""Exception types raised across the package."""


class FofcError(Exception):
    """Base class for every error raised by fofcmix."""


class DomainError(FofcError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateDistributionError(DomainError):
    """A correlation of exactly +/-1 where a density is required."""


class PreconditionError(FofcError, ValueError):
    """Inputs violate a documented precondition (sizes, index sets)."""


class EstimationError(FofcError):
    """A correlation estimator could not produce a value."""


class TestUndefinedError(FofcError):
    """A tetrad test statistic cannot be formed for the given inputs."""

    __test__ = False  # keep pytest from collecting this class
