"""Exception hierarchy shared by the solver modules."""

from __future__ import annotations


class CylspecError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(CylspecError, ValueError):
    """Invalid run configuration or input file."""


class NumericalError(CylspecError, ArithmeticError):
    """A numerical method failed (singular system, divergence, NaNs)."""


class SingularOperatorError(NumericalError):
    """A (shifted) banded operator could not be factorized."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class SpectrumError(NumericalError):
    """Spectral intervals are complex or overlap, so ADI shifts do not exist."""


class AdiConvergenceError(NumericalError):
    """ADI did not reach the requested tolerance; ``history`` holds the residuals."""

    def __init__(self, message: str, history):
        super().__init__(message)
        self.history = list(history)


class NotIncompressibleError(NumericalError):
    """A vector field handed to the poloidal-toroidal split has divergence."""
