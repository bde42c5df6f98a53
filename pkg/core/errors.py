"""
Error Types

Exception hierarchy shared by every veilcache module. Library code raises
these; the command line maps them onto exit codes.
"""

from enum import IntEnum
from typing import Optional, Tuple


class ExitCode(IntEnum):
    """Process exit codes."""
    SUCCESS = 0
    DECODE_FAILURE = 1
    PRIVACY_FAILURE = 2
    INPUT_ERROR = 3
    CAP_EXCEEDED = 4


class VeilcacheError(Exception):
    """Base class for all veilcache errors."""
    exit_code: ExitCode = ExitCode.INPUT_ERROR


class FieldError(VeilcacheError):
    """Invalid field or out-of-range element."""
    pass


class FieldMismatchError(FieldError):
    """Raised when elements of different fields are combined."""
    pass


class FieldDivisionError(FieldError, ZeroDivisionError):
    """Division by the zero element."""
    pass


class SingularMatrixError(VeilcacheError):
    """A square matrix with no inverse; column is the first dependent one."""

    def __init__(self, message: str, column: Optional[int] = None):
        super().__init__(message)
        self.column = column


class GeneratorError(VeilcacheError):
    """Malformed generator matrix or unsupported code parameters."""
    pass


class NotMDSError(GeneratorError):
    """A generator with a singular k x k column submatrix."""

    def __init__(self, message: str, witness: Tuple[int, ...] = ()):
        super().__init__(message)
        self.witness = witness


class ParamsError(VeilcacheError):
    """Invalid system parameters."""
    pass


class LibraryError(VeilcacheError):
    """Malformed or inconsistent file library."""
    pass


class DemandError(VeilcacheError):
    """Invalid demand vector."""
    pass


class NonUniformProfileError(DemandError):
    """Delivery requested for a demand whose profile is not uniform."""
    pass


class DecodeError(VeilcacheError):
    """A user could not recover its file from cache and broadcast."""
    exit_code = ExitCode.DECODE_FAILURE


class SegmentError(VeilcacheError):
    """Memory-sharing split does not give integral segment sizes."""
    pass


class CapExceededError(VeilcacheError):
    """Enumeration would exceed the configured case cap."""
    exit_code = ExitCode.CAP_EXCEEDED


class ConfigError(VeilcacheError):
    """Invalid run configuration."""
    pass
