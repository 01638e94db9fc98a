"""Exception hierarchy shared across the package."""


class SpecportError(Exception):
    """Base class for all package errors."""


class ValidationError(SpecportError, ValueError):
    """Invalid input: bad shapes, empty data, out-of-range parameters."""


class SymmetryViolationError(ValidationError):
    """An augmented vector that should be conjugate-symmetric is not.

    Signals a corrupted spectrum: synthesizing from it would produce a
    complex time-domain value.
    """


class FactorizationError(SpecportError):
    """A covariance factorization failed (non-PSD input)."""


class DegenerateMeanError(SpecportError):
    """The spectral (or time-domain) mean is numerically zero.

    The variance-targeted problem has no return direction and is
    unbounded below in the multiplier.
    """


class SingularCovarianceError(SpecportError):
    """Covariance is singular and no ridge was applied."""


class IngestionError(SpecportError):
    """A data file could not be ingested; message carries row context."""
