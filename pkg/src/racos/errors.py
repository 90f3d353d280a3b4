"""Exception types shared across the package."""


class RacosError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(RacosError):
    """An argument violates a documented precondition."""


class EmptySample(RacosError):
    """A random subsample came back empty where the algorithm needs at least one element."""


class NoSeparation(RacosError):
    """Oracle threshold selection found no gap between inlier and outlier residuals."""


def require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidInput(message)
