"""Exception types raised by the library."""

from __future__ import annotations


class CrossTrainError(Exception):
    """Base class for library errors."""


class ConfigError(CrossTrainError, ValueError):
    """Malformed configuration text or invalid parameter values."""


class FeasibilityError(CrossTrainError, ValueError):
    """First-stage levels outside ``[0, x0_gamma] x [0, x0_alpha]``."""


class RegimeError(CrossTrainError):
    """A regime-specific routine was called outside its hypotheses."""
