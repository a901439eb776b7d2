"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid argument or inconsistent inputs."""


class NumericError(ArithmeticError):
    """Non-finite values or a factorization that could not be completed."""


class UndefinedMetricError(NumericError):
    """A metric has no defined value for the given inputs."""
