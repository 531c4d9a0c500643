"""Exception hierarchy shared across the package.

ConfigError and DataError map to CLI exit codes 2 and 3; everything else
signals a bug and escapes as a plain traceback.
"""


class WicError(Exception):
    """Base class for all package errors."""


class ConfigError(WicError):
    """Invalid experiment configuration (CLI exit code 2)."""


class DataError(WicError):
    """Problem with input data files (CLI exit code 3)."""


class ParseError(DataError):
    """Malformed input file (JSON, CoNLL-U, vocabulary, store, checkpoint)."""


class ValidationError(DataError):
    """Structurally valid input with semantically invalid content."""


class AlignmentError(DataError):
    """Character spans and tokens cannot be reconciled."""


class DegenerateDataError(DataError):
    """Training data unusable, e.g. only one class present."""


class DimensionError(WicError):
    """Tensor shapes incompatible with the requested operation."""


class SpanError(WicError):
    """Empty or out-of-range token span."""


class LabelError(WicError):
    """Class label outside the expected set."""


class NumericError(WicError):
    """NaN or Inf encountered where finite values are required."""


class LengthError(DataError):
    """Token sequence exceeds the encoder's maximum length."""


class VocabularyError(DataError):
    """Token id outside the vocabulary."""
