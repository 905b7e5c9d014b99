"""Exception hierarchy shared across the toolkit."""


class GibbsKitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(GibbsKitError):
    """Invalid or inconsistent run configuration."""


class ModelValidationError(GibbsKitError):
    """An entropy model failed a growth or shape condition."""


class SolverError(GibbsKitError):
    """A root finder or quadrature routine failed to converge."""


class UntrustedSpectrumError(SolverError):
    """A spectral sum would need eigenvalues beyond the trusted range.

    Raised when an energy argument exceeds the retained spectrum or when
    the certified truncation-tail bound of an occupation sum exceeds its
    tolerance.  The fix is a larger eigenpair count or a finer grid.
    """


class InfeasibleConstraintError(GibbsKitError):
    """A requested global constraint lies outside the attainable range."""
