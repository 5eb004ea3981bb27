"""Exception types shared across the package."""

from __future__ import annotations


class InvalidParameterError(ValueError):
    """A physical or numerical parameter is outside its valid domain."""


class ConvergenceError(RuntimeError):
    """An iterative kernel stopped before reaching its tolerance.

    ``estimate`` holds the best value found and ``residual`` the last
    error indicator, so callers can decide whether to use it anyway.
    """

    def __init__(self, message: str, estimate: float = float("nan"),
                 residual: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual


class NoRootError(RuntimeError):
    """No sign change was found, even after expanding the bracket."""

    def __init__(self, message: str, lo: float, hi: float,
                 g_lo: float, g_hi: float):
        super().__init__(message)
        self.lo, self.hi = lo, hi
        self.g_lo, self.g_hi = g_lo, g_hi
