"""Exception types raised by the package.

Everything derives from :class:`SpcShrinkError` and from :class:`ValueError`,
so callers can catch either.
"""


class SpcShrinkError(ValueError):
    """Base class for all package errors."""


class SignalLengthError(SpcShrinkError):
    """Signal length is not a power of two (or is too short)."""


class LevelError(SpcShrinkError):
    """Requested decomposition depth exceeds what the signal supports."""


class StructureError(SpcShrinkError):
    """A decomposition whose level lengths are inconsistent."""


class ThresholdError(SpcShrinkError):
    """Negative threshold value."""


class TooFewSamplesError(SpcShrinkError):
    pass


class ConfigError(SpcShrinkError):
    """Invalid method, SPC or benchmark configuration."""


class UnknownWaveletError(ConfigError):
    pass


class SignalParseError(SpcShrinkError):
    """A CSV row could not be parsed; ``row`` is 1-based."""

    def __init__(self, message, row=None, path=None):
        super().__init__(message)
        self.row = row
        self.path = path


class EmptyInputError(SpcShrinkError):
    pass
