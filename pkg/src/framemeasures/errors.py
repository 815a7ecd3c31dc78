"""Exception types shared across the package."""


class MeasureError(Exception):
    """Base class for all framemeasures errors."""


class InvalidMeasureError(MeasureError):
    """An expression violates a structural invariant (bad weights, zero-mass
    normalization, mismatched dimensions, ...)."""


class RealizationTooLargeError(MeasureError):
    """An atomic realization would exceed the configured atom cap."""


class EnvelopeViolationError(MeasureError):
    """A density strayed outside its certified envelope on the spot-check grid."""


class ConstructionError(MeasureError):
    """A certified-pair transformer was applied outside its preconditions."""


class TransformError(MeasureError):
    """A Fourier transform request cannot be evaluated."""


class ConfigError(MeasureError):
    """A run configuration failed to parse or validate."""
