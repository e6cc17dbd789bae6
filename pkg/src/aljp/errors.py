"""Exception hierarchy shared across the toolkit.

``DataError`` subclasses map to CLI exit code 2 (bad data / validation);
anything else escaping a command maps to exit code 3.
"""


class AljpError(Exception):
    """Base class for all toolkit errors."""


class DataError(AljpError):
    """Invalid input data, configuration, or file contents."""


class UnknownLabelError(DataError):
    """A record carries a label string not present in its catalog."""


class EmbeddingFormatError(DataError):
    """Word-vector file violates the declared text format."""


class NotFittedError(AljpError):
    """A transform was requested before fitting."""


class ArtifactError(DataError):
    """Model artifact failed validation (magic, version, shape, truncation)."""


class NotFoundError(AljpError):
    """Prediction request referenced an unknown model id."""


class InvalidInputError(AljpError):
    """Prediction request carried unusable input (e.g. empty after preprocessing)."""
