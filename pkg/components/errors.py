"""
Exception hierarchy shared by all components.

Every error carries the process exit code the CLI reports for it.
"""


class CutoffLabError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(CutoffLabError):
    exit_code = 2


class UnstableDrift(CutoffLabError):
    """Some eigenvalue of the drift matrix has non-positive real part."""

    exit_code = 3


class MomentGate(CutoffLabError):
    """Requested Wasserstein order exceeds the moments of the noise."""

    exit_code = 4


class ReproductionFailure(CutoffLabError):
    exit_code = 5


class NonConvergence(CutoffLabError):
    pass


class IllConditioned(CutoffLabError):
    pass


class Overflow(CutoffLabError):
    pass


class ZeroInitialState(CutoffLabError):
    pass


class RealSpectrum(CutoffLabError):
    pass


class SingularCovariance(CutoffLabError):
    pass


class DomainError(CutoffLabError):
    pass


class NoProfile(CutoffLabError):
    pass


class StepTooLarge(CutoffLabError):
    pass


class DimensionError(CutoffLabError):
    pass


class SizeMismatch(CutoffLabError):
    pass


class TooLarge(CutoffLabError):
    pass


class DegenerateNoise(CutoffLabError):
    pass
