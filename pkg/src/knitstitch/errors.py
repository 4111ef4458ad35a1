"""Exception types.

ValidationError subclasses signal bad inputs detected before any work starts;
the CLI maps them to exit code 1. Everything else raised by the package maps
to exit code 2 (runtime failure).
"""


class KnitstitchError(Exception):
    """Base class for all package errors."""


class ValidationError(KnitstitchError):
    """Invalid input, configuration, or on-disk layout."""


class CorpusLayoutError(ValidationError):
    """Corpus directory does not follow the class-per-subdirectory layout."""


class ManifestError(ValidationError):
    """Manifest violates its invariants or cannot be parsed."""


class SplitError(ValidationError):
    """Stratified split preconditions not met."""


class ConfigError(ValidationError):
    """Run configuration failed validation."""


class BackboneWeightsError(ValidationError):
    """Pretrained weights missing, unresolvable, or checksum-corrupt."""


class ShapeError(ValidationError):
    """Array input has the wrong shape or value range."""


class TrainingDivergedError(KnitstitchError):
    """Training produced a non-finite loss."""
