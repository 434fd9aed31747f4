"""Exception hierarchy for pairlab.

Every error carries the exit code the CLI reports for it.
"""

from typing import Optional


class PairlabError(Exception):
    """Base class for all pairlab errors."""

    exit_code = 1


class ConfigError(PairlabError):
    """Invalid configuration or input data."""

    exit_code = 2


class OutputError(PairlabError):
    """Output could not be written."""

    exit_code = 3


class NumericError(PairlabError):
    """A solver, estimator or fit could not produce a result."""

    exit_code = 4


# Configuration / validation

class UnsortedInputError(ConfigError, ValueError):
    """Event stream is not time-sorted."""


class TacConfigError(ConfigError, ValueError):
    """TAC bin width does not fit inside its range."""


class WindowRangeError(ConfigError, ValueError):
    """Coincidence window lies outside the histogram range."""


class ImbalanceMismatchError(ConfigError, ValueError):
    """Interferometers in one experiment are not equally unbalanced."""


class UnknownBinError(ConfigError, LookupError):
    """Requested outcome bin does not exist."""


class CsvParseError(ConfigError, ValueError):
    """Malformed CSV input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# Numeric

class EnergyConservationError(NumericError, ValueError):
    """Signal wavelength does not exceed the pump wavelength."""


class DomainError(NumericError, ValueError):
    """Wavelength outside the dispersion model's domain."""


class NoPositivePeriodError(NumericError, ValueError):
    """Carrier mismatch is negative; no positive first-order period exists."""


class NoFinitePeriodError(NumericError, ValueError):
    """Carrier mismatch is zero; no finite period is needed."""


class FwhmUndefinedError(NumericError, ValueError):
    """Grid does not bracket the half maximum on both sides."""

    def __init__(self, message: str, spectrum=None):
        self.spectrum = spectrum
        super().__init__(message)


class UndefinedEstimateError(NumericError, ValueError):
    """Estimator denominator is zero."""


class MuInversionError(NumericError, ValueError):
    """Satellite/central ratio outside the invertible range."""


class FitError(NumericError, ValueError):
    """Least-squares fit is degenerate."""
