"""Exception hierarchy for nrm_lab."""


class NrmError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(NrmError, ValueError):
    """An input record failed validation."""


class DimensionMismatch(ValidationError):
    pass


class NonpositiveRate(ValidationError):
    pass


class NonpositiveRevenue(ValidationError):
    pass


class NegativeCapacity(ValidationError):
    pass


class ZeroColumn(ValidationError):
    pass


class InstanceFormatError(ValidationError):
    """A serialized instance is malformed; ``key`` names the offending field."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class SpecError(ValidationError):
    """An experiment spec is malformed."""


class SolutionInstanceMismatch(ValidationError):
    pass


class WindowOutOfRange(ValidationError):
    pass


class HorizonTooShort(ValidationError):
    pass


class ParameterOutOfRange(ValidationError):
    pass


class TooLarge(NrmError):
    pass


class NumericalFailure(NrmError, ArithmeticError):
    """The simplex solver failed to converge (cycling guard or unboundedness)."""

    def __init__(self, message, iterations=None):
        self.iterations = iterations
        super().__init__(message if iterations is None else f"{message} after {iterations} iterations")


class NonpositiveRegret(UserWarning):
    """A sweep point was dropped from a log-log fit because its mean regret is <= 0."""


class NegativeConsumption(ValidationError):
    pass


class ExperimentError(NrmError, RuntimeError):
    """A module error raised while running an experiment, with sweep/seed context."""
