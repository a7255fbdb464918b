"""Exception hierarchy.

Everything derives from ``DpCdfError``; the two intermediate classes decide
the CLI exit code (``ConfigError`` -> 2, ``DataError`` -> 3).
"""


class DpCdfError(ValueError):
    """Base class for all errors raised by dpcdf."""


class ConfigError(DpCdfError):
    pass


class DataError(DpCdfError):
    pass


class EmptyDataset(DataError):
    pass


class DegenerateBounds(ConfigError):
    pass


class OutOfBounds(DataError):
    pass


class NonPositiveN(ConfigError):
    pass


class InvalidPrivacyParams(ConfigError):
    pass


class EpsilonOutOfRange(InvalidPrivacyParams):
    pass


class KTooLarge(ConfigError):
    pass


class InvalidParameters(ConfigError):
    pass


class GridMismatch(DataError):
    pass


class MismatchedOrder(DataError):
    pass


class EmptyContributionList(DataError):
    pass


class ConfigInvalid(ConfigError):
    pass
