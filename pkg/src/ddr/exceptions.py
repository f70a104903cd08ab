"""Exception hierarchy shared across the package."""


class DdrError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(DdrError, ValueError):
    """Operands have incompatible lengths or shapes."""


class DegenerateInputError(DdrError, ValueError):
    """Input lacks the size or variation the operation requires."""


class DegenerateDirectionError(DegenerateInputError):
    """A degradation direction with (near-)constant entries cannot be adapted."""


class UndefinedDisparityError(DegenerateInputError):
    """Cosine disparity is undefined for a zero-norm vector."""


class UndefinedCorrelationError(DegenerateInputError):
    """Rank correlation is undefined when either list is constant."""


class ConfigurationError(DdrError, ValueError):
    """A config document, degradation spec string, or option value is invalid."""


class TokenizationError(DdrError, ValueError):
    """Text cannot be encoded under the context-length contract."""


class AssetError(DdrError):
    """Model assets are missing, corrupt, or fail manifest verification."""


class SessionError(DdrError):
    """An encoder session was misused or its graph failed to execute."""


class DataError(DdrError):
    """An input image or dataset manifest cannot be read."""
