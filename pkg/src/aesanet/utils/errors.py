"""Exception hierarchy shared by every aesanet module."""


class AesaError(Exception):
    """Base class for all aesanet errors."""


class ValidationError(AesaError, ValueError):
    """Input rejected before any computation ran."""


class InvalidClipError(ValidationError):
    pass


class ShapeError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class ConfigError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ManifestError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MissingColumnError(ManifestError):
    pass


class DuplicateClipIdError(ManifestError):
    def __init__(self, clip_id: str, line: int | None = None):
        self.clip_id = clip_id
        super().__init__(f"duplicate clip_id {clip_id!r}", line)


class ScoreRangeError(ManifestError):
    pass


class UnknownDomainError(ManifestError):
    pass


class UnmatchedClipError(ValidationError):
    def __init__(self, clip_ids: list[str]):
        self.clip_ids = list(clip_ids)
        super().__init__(f"clip ids not found in gold manifest: {', '.join(self.clip_ids)}")


class IncompleteReportError(ValidationError):
    pass


class FormatError(AesaError, ValueError):
    """A binary artifact could not be parsed."""


class BadMagicError(FormatError):
    pass


class UnsupportedVersionError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    pass


class NonFiniteValueError(FormatError):
    pass


class CorruptCheckpointError(FormatError):
    pass


class NumericError(AesaError, ArithmeticError):
    """Non-finite values appeared during computation."""


class UndefinedCorrelationError(AesaError, ArithmeticError):
    """A correlation was requested for a constant vector."""
