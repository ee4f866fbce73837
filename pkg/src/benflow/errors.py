"""Exception hierarchy shared by all benflow modules."""


class BenflowError(Exception):
    """Base class for every error raised by benflow."""


class DimensionMismatchError(BenflowError, ValueError):
    """Grid functions or arrays do not live on the same space."""


class ImproperFunctionError(BenflowError, ValueError):
    """A convex function is improper, non-convex, or otherwise malformed."""


class RepresentationError(BenflowError, ValueError):
    """A representative cannot be built or evaluated as requested."""


class CoercivityError(BenflowError):
    """A coercivity requirement fails.

    Raised for an infimum attained on the boundary of its search grid and for
    a conductivity that is not bounded away from zero.
    """


class FamilyUndefinedError(BenflowError):
    """A parametrized family was queried outside its domain."""


class ConvectionFieldError(BenflowError, ValueError):
    """A velocity field has positive discrete divergence."""


class NonConvergentFamilyError(BenflowError):
    """A sequence of integrands does not converge pointwise."""


class ConvergenceError(BenflowError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, iterations: int = 0):
        super().__init__(message)
        self.iterations = iterations


class ConfigError(BenflowError):
    """A run configuration failed to parse or validate."""


class UnknownCommandError(ConfigError):
    """A run configuration names a command that does not exist."""


class ReportError(BenflowError):
    """A report is malformed or could not be written."""


class StabilityAborted(BenflowError):
    """A stability experiment stopped early; the partial report is attached."""

    def __init__(self, message: str, report: object):
        super().__init__(message)
        self.report = report
