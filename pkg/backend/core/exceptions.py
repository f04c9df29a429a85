"""
Exception hierarchy shared by every app.

Each error carries the process exit code the management commands use when
the error reaches the command line:

    0  ok
    2  usage / configuration error
    3  data error (malformed input, shape mismatch, empty input)
    4  numeric failure (NaN/Inf)
"""


class TreatRecError(Exception):
    """Base class for all domain errors."""

    exit_code: int = 1


class ConfigurationError(TreatRecError, ValueError):
    """Invalid parameters or configuration values."""

    exit_code = 2


class DimensionError(TreatRecError, ValueError):
    """Operands with incompatible shapes."""

    exit_code = 3


class DataError(TreatRecError):
    """Input data could not be used."""

    exit_code = 3


class DataFormatError(DataError):
    """
    Malformed input record.

    Carries the file path and 1-based line number when known so the
    operator can find the offending line.
    """

    def __init__(self, message: str, path=None, line_number=None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        super().__init__(f"{location}{message}")


class EmptyInputError(DataError, ValueError):
    """An operation received no items to work on."""


class ShapeMismatchError(DataError, DimensionError):
    """Checkpoint and data disagree on medication count or feature dimensions."""

    exit_code = 3


class NumericalError(TreatRecError, ArithmeticError):
    """A computation produced NaN or Inf."""

    exit_code = 4
