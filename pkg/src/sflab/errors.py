"""Exception types shared across the package."""


class SfLabError(Exception):
    """Base class for all package errors."""


class ConfigError(SfLabError):
    """Invalid configuration: bad schedule parameters, dimension mismatch,
    incompatible check selection, unknown format, and similar."""


class MapInfeasibleError(SfLabError):
    """A requested optimizer parameter map has no valid coefficients.

    Carries the first offending step index in ``t``.
    """

    def __init__(self, message: str, t: int):
        super().__init__(message)
        self.t = t


class NonFiniteGradientError(SfLabError):
    """The gradient oracle returned a non-finite value during a run."""

    def __init__(self, message: str, t: int, point):
        super().__init__(message)
        self.t = t
        self.point = point


class DomainEscapeError(SfLabError):
    """An iterate left the box on which the problem's smoothness constant
    was certified by more than the allowed margin."""

    def __init__(self, message: str, t: int, point):
        super().__init__(message)
        self.t = t
        self.point = point


class UndefinedCoefficientError(SfLabError):
    """A potential coefficient is undefined at the requested step
    (averaging weight equal to one makes its denominator vanish)."""
