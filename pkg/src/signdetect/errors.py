"""Exception types shared across the package."""


class SignDetectError(Exception):
    """Base class for every error raised by this package."""


class DegeneratePose(SignDetectError):
    """No usable shoulder distance: normalization is undefined."""


class LengthMismatch(SignDetectError):
    """Two per-frame or per-point arrays disagree in length."""


class DimensionMismatch(SignDetectError):
    """An input does not match the model or session dimensionality."""


class ShapeMismatch(SignDetectError):
    """Logits and labels (or similar paired arrays) disagree in shape."""


class EmptyInput(SignDetectError):
    """An operation that needs at least one frame received none."""


class EmptyCorpus(SignDetectError):
    """A training or split operation received no sequences."""


class ParseError(SignDetectError):
    """A pose export file is malformed; the message names the frame."""


class MissingFps(SignDetectError):
    """No frame rate in the file header and none supplied by the caller."""


class CorruptModelFile(SignDetectError):
    """A model file failed structural validation.

    ``offset`` is the byte position at which parsing failed.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class CorruptFeatureFile(SignDetectError):
    """A feature file failed structural validation."""
