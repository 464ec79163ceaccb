"""module for the exception hierarchy raised by uec-lab services"""


class UecLabError(Exception):
    """Base class for every domain error."""

    exit_code = 1


class ConfigValidationError(UecLabError):
    exit_code = 2


class NetCostError(ConfigValidationError):
    """Net construction requested beyond the supported depth."""


class CompositionCapError(ConfigValidationError):
    pass


class NumericContractError(UecLabError):
    """An operator or vector left the unit ball beyond tolerance."""

    exit_code = 3


class DimensionMismatchError(UecLabError, ValueError):
    exit_code = 2


class NonUnitaryError(NumericContractError):
    pass


class NotBoundedBelowError(NumericContractError):
    pass


class ReportWriteError(UecLabError):
    """Report or curve files could not be written."""
