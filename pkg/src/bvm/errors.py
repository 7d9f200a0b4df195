"""Exception types raised across the package."""


class BvmError(Exception):
    """Base class for all package errors."""


class InvalidInput(BvmError, ValueError):
    pass


class DimensionMismatch(BvmError, ValueError):
    pass


class NotPositiveDefinite(BvmError, ValueError):
    """A block that must be SPD failed the eigenvalue floor."""


class SingularMatrix(BvmError, ValueError):
    pass


class SingularHessian(BvmError, ValueError):
    pass


class RankDeficient(BvmError, ValueError):
    pass


class NoConvergence(BvmError, RuntimeError):
    pass


class ZeroCount(BvmError, ValueError):
    """A group sum is zero, so log(Z_j / M) is undefined."""


class Infeasible(BvmError, ValueError):
    pass


class BoxTooSmall(BvmError, ValueError):
    """The quadrature box cuts off non-negligible posterior mass."""


class NonFiniteDensity(BvmError, ValueError):
    pass


class ConfigError(BvmError, ValueError):
    """Bad experiment or bounds configuration.

    ``field`` names the offending key when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
