"""Exception types raised across the package."""


class ContractError(ValueError):
    """An argument violates a documented precondition."""


class NumericError(ArithmeticError):
    """An iterative routine failed to converge or produced non-finite values."""


class ScaleRangeError(NumericError):
    """A scale search left the admissible range of scales."""


class ConfigError(ValueError):
    """A run configuration is incomplete or inconsistent."""


class UnboundedBallError(NumericError):
    """Directional search could not bracket the boundary of a ball."""
