"""Exception types shared across the package.

Every error carries a stable, machine-readable ``category`` string. The
command line layer maps categories to exit codes, so the strings are part
of the public interface and must not be renamed casually.
"""

from __future__ import annotations


class HbtSimError(Exception):
    """Base class for all package errors."""

    category: str = "error"

    def __init__(self, message: str, category: str | None = None):
        super().__init__(message)
        if category is not None:
            self.category = category


class ParamError(HbtSimError, ValueError):
    """A spec or argument value is outside its allowed range."""

    category = "invalid-parameter"


class SamplingError(HbtSimError):
    """A record is too short or too coarsely sampled for the request.

    Raised with category ``sampling-too-coarse`` or ``duration-too-short``.
    """

    category = "sampling"


class GridError(HbtSimError):
    """Two records cannot be combined on a common time grid.

    Categories: ``grid-mismatch``, ``shift-exceeds-record``,
    ``window-longer-than-record``, ``empty-overlap``.
    """

    category = "grid-mismatch"


class AnalysisError(HbtSimError):
    """An estimator cannot produce a meaningful result from its input.

    Categories: ``fit-degenerate``, ``missing-reference-delay``,
    ``insufficient-bins``, ``visibility-out-of-range``.
    """

    category = "analysis"


class ConfigError(HbtSimError):
    """A scenario configuration failed validation.

    Categories: ``config-invalid``, ``unknown-parameter``.
    """

    category = "config-invalid"
