"""Exception types shared across the package."""


class HiergenError(Exception):
    """Base class for all library errors."""


class EmptyArticle(HiergenError):
    """Raised when an article has no body content left after cleaning."""


class InvalidId(HiergenError):
    """Raised when a token id is outside the vocabulary or embedding range."""


class ShapeError(HiergenError):
    """Raised when tensor shapes violate an operation's contract."""


class NumericalError(HiergenError):
    """Raised when a computation produces or receives non-finite values."""


class NoContent(HiergenError):
    """Raised when an article has no content words for weighting."""


class AlignmentError(HiergenError):
    """Raised when parallel sequences that must be line-aligned are not."""


class EmptyBatch(HiergenError):
    """Raised when a loss is requested over a batch with no real tokens."""


class DivergedError(HiergenError):
    """Raised when training produces a non-finite loss."""


class IncompatibleCheckpoint(HiergenError):
    """Raised when a checkpoint's format version is not supported."""


class CorruptCheckpoint(HiergenError):
    """Raised when a checkpoint file is truncated or malformed."""


class VocabMismatch(HiergenError):
    """Raised when chained models disagree on a shared vocabulary."""


class UsageError(HiergenError):
    """Raised by the CLI for bad flags or subcommands."""
