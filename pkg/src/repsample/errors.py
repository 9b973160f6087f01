"""Exception hierarchy shared across the package."""


class RepSampleError(Exception):
    """Base class for all library errors."""


class ConfigError(RepSampleError):
    """Invalid user-supplied configuration (CLI exit code 2)."""


class ParseError(ConfigError):
    pass


class MissingValue(ConfigError):
    pass


class TooSmall(ConfigError):
    pass


class InvalidSpec(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class DuplicateNode(RepSampleError):
    pass


class ZeroVariance(RepSampleError):
    pass


class SingularMatrix(RepSampleError):
    pass


class CalibrationFailed(RepSampleError):
    pass


class DegenerateCommunities(RepSampleError):
    pass


class InfeasibleEpsilon(RepSampleError):
    """No partition satisfies the error bound.

    ``certificate`` carries the smallest error that was attainable, so the
    caller can report how far off the requested bound is.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class TooLarge(RepSampleError):
    pass


class ZeroSignal(RepSampleError):
    pass


class ConvergenceWarning(UserWarning):
    pass


class NotConverged(RepSampleError):
    pass
