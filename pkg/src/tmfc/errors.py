"""Exception types shared across the package.

The split mirrors the CLI exit-code contract: configuration problems
(bad parameters, grids that cannot resolve the requested problem,
unsupported regime/engine combinations) versus numerical failures
detected at run time.
"""


class TmfcError(Exception):
    """Base class for package errors."""


class ConfigurationError(TmfcError, ValueError):
    """Invalid parameters, grids, or option combinations."""


class RegimeError(ConfigurationError):
    """Operation invoked outside the phase-matching regime it supports."""


class ResolutionError(ConfigurationError):
    """Grid too coarse (or too small) to resolve the requested object."""

class CoverageError(ConfigurationError):
    """Time window does not cover the interaction support."""


class UnsupportedConfigurationError(ConfigurationError):
    """Parameter combination outside the validity of a closed form."""


class NumericalError(TmfcError, RuntimeError):
    """Numerical failure during a computation (blow-up, non-convergence)."""


class DataError(TmfcError, ValueError):
    """Malformed numerical data (non-finite entries, shape mismatch)."""


class TruncationError(NumericalError):
    """Basis truncation leaks more energy than the configured tolerance."""
