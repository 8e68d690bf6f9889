"""Exception hierarchy shared by the whole package.

Each CLI-visible failure category maps to one subclass so that exit codes
stay stable (see cli.EXIT_CODES).
"""


class TsInvestError(Exception):
    """Base class for all package errors."""


class DimensionError(TsInvestError):
    """Operand shapes do not conform."""


class NumericInputError(TsInvestError):
    """Non-finite or out-of-domain numeric input."""


class ConfigurationError(TsInvestError):
    """Invalid model or run configuration."""


class DegenerateBatchError(TsInvestError):
    """A reduction has no unmasked positions (or an empty batch)."""


class VocabularyError(TsInvestError):
    """Embedding id outside the vocabulary."""


class EmptyRecordError(TsInvestError):
    """A company record carries no observations."""


class ParseError(TsInvestError):
    """Malformed dataset file content."""


class ValidationError(TsInvestError):
    """Well-formed input that violates the schema contract."""


class SplitInfeasibleError(TsInvestError):
    """Fewer investor groups than nonzero split parts."""


class DivergenceError(TsInvestError):
    """Training produced a non-finite loss."""


class InfeasibleSizeError(TsInvestError):
    """Requested portfolio size exceeds the candidate pool."""


class UndefinedMetricError(TsInvestError):
    """Metric undefined for the given labels (e.g. single-class AUC)."""


class SchemaMismatchError(TsInvestError):
    """Checkpoint was trained against a different feature schema."""
