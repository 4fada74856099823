"""Exception types shared across the package."""


class KlvqError(Exception):
    """Base class for all library errors."""


class ParameterError(KlvqError, ValueError):
    """An argument violates a precondition (bad k, M > N, dimension mismatch, ...)."""


class DomainError(KlvqError, ValueError):
    """A mathematical domain violation (unsmoothed zeros, empty subset with no smoothing)."""


class DatasetFormatError(KlvqError, ValueError):
    """A dataset or manifest file does not match the expected CSV schema."""


class ModelFormatError(KlvqError, ValueError):
    """A model file is missing, truncated, or has an unsupported version/schema."""
