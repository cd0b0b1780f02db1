"""Exception types shared across the package."""

from __future__ import annotations


class DimensionLimitError(ValueError):
    """Raised when a dense 2^N object would exceed the configured spin cap."""


class PerturbativeRegimeError(ValueError):
    """Raised when the small-field proposal rows would carry mass above one.

    ``h_threshold`` is the largest transverse field for which the offending
    row stays sub-stochastic (0.0 when a single-flip pair is degenerate).
    """

    def __init__(self, message: str, h_threshold: float):
        super().__init__(message)
        self.h_threshold = h_threshold


class DetailedBalanceError(ValueError):
    """Raised when a chain fails its reversibility check.

    Carries the measured maximum relative flow asymmetry as ``residual``.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class QuadratureError(RuntimeError):
    """Raised when the quadrature error estimate stays above tolerance."""


class ConfigError(ValueError):
    """Raised for invalid experiment configuration files or values."""
