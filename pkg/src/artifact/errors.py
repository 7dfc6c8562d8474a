"""Exception types shared across the package."""


class ArtifactError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ArtifactError, ValueError):
    """Invalid configuration or violated input precondition."""


class NumericFailure(ArtifactError, RuntimeError):
    """A computation ran but produced an unusable result."""


class SingularRelativeVelocity(ConfigurationError):
    pass


class AlreadySymmetrized(ConfigurationError):
    pass


class DegenerateDirection(ConfigurationError):
    pass


class NonFiniteField(NumericFailure):
    pass


class VarianceOverflow(NumericFailure):
    pass


class NegativeDensity(NumericFailure):
    pass


class GridMismatch(ConfigurationError):
    pass


class WeightTooSmall(ConfigurationError):
    pass


class UnknownIdentity(ConfigurationError, KeyError):
    pass


class UnknownEntry(ConfigurationError, KeyError):
    pass


class PreconditionViolated(ConfigurationError):
    pass


class StabilityViolation(ConfigurationError):
    pass


class NonFinite(NumericFailure):
    pass


class NoContraction(NumericFailure):
    pass


class InsufficientData(NumericFailure):
    pass


class DegenerateWindow(NumericFailure):
    pass
