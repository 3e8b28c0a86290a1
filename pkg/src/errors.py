"""
Exception types for wikisustain.

Every failure the pipeline reports on purpose derives from WikisustainError,
so the CLI can map it to an exit status.
"""


class WikisustainError(Exception):
    """Base class for pipeline errors."""


class ConfigError(WikisustainError):
    """Configuration violates the documented schema.

    Attributes:
        field_path (str): Dotted path of the offending field, e.g. ``paths.dump``
    """

    def __init__(self, field_path, message):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


class InputMissingError(ConfigError):
    """A configured input path does not exist."""


class DumpParseError(WikisustainError):
    """Malformed dump XML. Carries the byte offset reached when parsing failed."""

    def __init__(self, message, byte_offset, line=None, column=None):
        self.byte_offset = byte_offset
        self.line = line
        self.column = column
        super().__init__(f"{message} (byte offset {byte_offset}, line {line}, column {column})")


class StatusListError(WikisustainError):
    """A status list could not be read or fetched."""


class LabelError(WikisustainError):
    """Quality timelines cannot be built or read back."""


class FeatureError(WikisustainError):
    """A feature family is missing or cannot be computed for an article."""

    def __init__(self, article, family, message="missing feature family"):
        self.article = article
        self.family = family
        super().__init__(f"{message}: article={article!r} family={family}")


class ScorerError(WikisustainError):
    """A linguistic scorer cannot produce scores (unknown scorer, missing sidecar key)."""


class ModelError(WikisustainError):
    """Training or prediction precondition violated."""


class EvaluationError(WikisustainError):
    """An evaluation protocol cannot be carried out on the given data."""


class StageError(WikisustainError):
    """A pipeline stage failed."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"stage '{stage}' failed: {message}")
