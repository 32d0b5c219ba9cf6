"""
Error types raised by the maximal-mean toolkit.

Every error derives from MeanScaleError, itself a ValueError, so callers that
only care about "bad input" can keep catching ValueError.
"""


class MeanScaleError(ValueError):
    """Base class for all input and precondition errors."""


# Series and exponent validation
class InvalidSeriesError(MeanScaleError):
    """Series is empty or its sample spacing is not positive."""


class NonFiniteInputError(MeanScaleError):
    """A value is NaN or infinite."""


class InvalidExponentError(MeanScaleError):
    """Exponent p is not a finite positive number (or below 1 where a lemma needs p >= 1)."""


class WindowTooLongError(MeanScaleError):
    """Requested window does not fit into the series."""


class InvalidPeriodError(MeanScaleError):
    pass


class LengthTooShortError(MeanScaleError):
    pass


class PartitionTooLongError(MeanScaleError):
    pass


class InvalidPartitionError(MeanScaleError):
    pass


class BadOrderError(MeanScaleError):
    """Two scales were given in the wrong order (or one is a multiple of the other)."""


class EmptyLadderError(MeanScaleError):
    pass


# Step functions
class InvalidLengthError(MeanScaleError):
    pass


class EmptySupportError(MeanScaleError):
    pass


class InvalidEpsilonError(MeanScaleError):
    pass


class NotACounterexampleCaseError(MeanScaleError):
    """T is a factor of S (or T >= S), so no bump train can beat the smaller scale."""


# Verification
class InvalidGridError(MeanScaleError):
    pass


class UnknownCheckError(MeanScaleError):
    pass


# Ingestion and CLI
class ParseError(MeanScaleError):
    pass


class NonMonotoneTimeError(MeanScaleError):
    pass


class IrregularSamplingWithoutResampleError(MeanScaleError):
    pass


class TooShortError(MeanScaleError):
    pass


class WindowConversionError(MeanScaleError):
    """Physical window does not map onto a whole number of samples within 1%."""


class ConfigError(MeanScaleError):
    pass


class InvalidStepFunctionError(MeanScaleError):
    """Breakpoints are not strictly increasing and finite, or do not match the piece values."""
