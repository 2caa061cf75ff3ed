"""Exception types shared across the package."""


class GallerySyncError(Exception):
    """Base class for all errors raised by this package."""


class ManifestError(GallerySyncError):
    """A collection manifest or ground-truth file is malformed."""


class FeatureError(GallerySyncError):
    """A region-feature file or descriptor operation is invalid."""


class EstimationError(GallerySyncError):
    """Offset estimation or parameter learning received unusable input."""


class PipelineError(GallerySyncError):
    """End-to-end synchronization could not be completed."""


class EvaluationError(GallerySyncError):
    """Prediction/ground-truth mismatch during scoring."""
