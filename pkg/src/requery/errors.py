"""Exception types shared across the package."""


class RequeryError(Exception):
    """Base class for all package-specific errors."""


class EmptyQuery(RequeryError):
    """Raised when text normalizes/tokenizes to nothing."""


class CorpusFormatError(RequeryError):
    """Raised when a corpus file contains a malformed record."""


class ConfigError(RequeryError):
    """Raised when a configuration violates its invariants."""


class VocabMismatch(RequeryError):
    """Raised when token ids or a vocabulary hash do not match the model."""


class MalformedInput(RequeryError):
    """Raised when an infill input does not contain exactly one mask."""


class EmptySpan(RequeryError):
    """Raised when a prediction carries zero content tokens."""


class DuplicateDocument(RequeryError):
    """Raised when a search corpus contains a repeated doc_id."""


class EmptyEvaluation(RequeryError):
    """Raised when an evaluation is asked to aggregate zero queries."""


class CorruptFixture(RequeryError):
    """Raised when an eval case references a document missing from the corpus."""
