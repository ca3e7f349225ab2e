"""Exception hierarchy shared across the package."""


class Cost2TimeError(Exception):
    """Base class for all package-specific errors."""


class ParseError(Cost2TimeError):
    """A plan document is malformed or violates a structural invariant."""


class SchemaError(Cost2TimeError):
    """Feature vectors or models were combined under mismatched schemas."""


class DegenerateFitError(Cost2TimeError):
    """Training data cannot support a fit (too few points, singular design)."""


class DomainError(Cost2TimeError):
    """An argument is outside the mathematical domain of the operation."""


class ConfigError(Cost2TimeError):
    """A configuration object is internally inconsistent or out of range."""


class DuplicateError(Cost2TimeError):
    """A sample with an already-present query_id was added to a corpus."""


class EvalError(Cost2TimeError):
    """Cross-validation failed; the message names the fold and cause."""


class ModelFormatError(Cost2TimeError):
    """A serialized model has an unknown family or format version."""


class ConvergenceWarning(UserWarning):
    """An iterative solver hit its iteration cap before reaching tolerance."""
