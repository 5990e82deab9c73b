"""Exception hierarchy for the gesturesynth toolkit."""


class GestureSynthError(Exception):
    """Base class for all toolkit errors."""


# --- dataset ingestion ---

class DatasetError(GestureSynthError):
    pass


class MissingAnnotationFile(DatasetError):
    pass


class MalformedAnnotationLine(DatasetError):
    def __init__(self, path, line_number, reason):
        self.path = str(path)
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{path}:{line_number}: {reason}")


class ImageNotFound(DatasetError):
    pass


class UnknownEnvironment(DatasetError):
    pass


class OverlappingSplit(DatasetError):
    pass


# --- mask extraction ---

class MaskError(GestureSynthError):
    pass


class ValueOutOfRange(MaskError):
    pass


class EmptyMask(MaskError):
    pass


class NoHandFound(MaskError):
    pass


class DegenerateTrimap(MaskError):
    pass


# --- gesture synthesis ---

class SingularTransform(GestureSynthError):
    pass


class EmptyFrame(GestureSynthError):
    pass


class MaskClippedWarning(UserWarning):
    """A warped frame lost a large fraction of the reference mask to clipping."""


# --- GAN training / inference ---

class ModelError(GestureSynthError):
    pass


class ConfigInvalid(ModelError):
    pass


class InputTooSmall(ModelError):
    pass


class ShapeMismatch(ModelError):
    pass


class ShapeIncompatible(ModelError):
    pass


class NonFiniteScores(ModelError):
    pass


class EmptyDomain(ModelError):
    pass


class DivergedLoss(ModelError):
    pass


class UnknownDomain(ModelError):
    pass


class UntrainedModel(ModelError):
    pass


class MissingMask(ModelError):
    pass


# --- pipeline ---

class PipelineError(GestureSynthError):
    pass


class ConfigError(PipelineError):
    pass


class StageError(PipelineError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


class TooFewFrames(PipelineError):
    pass


class EmptySequence(PipelineError):
    pass


class LabelValidityWarning(UserWarning):
    """Labels were carried across domain translation without re-verification."""
