# app/core/errors.py
from typing import Optional

from app.const.enum import ExitCode


class NoiseOracleError(Exception):
    """Base error. `exit_code` plays the role an HTTP status code plays for an API."""
    exit_code: int = ExitCode.INTERNAL_FAILURE

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidParameterError(NoiseOracleError, ValueError):
    exit_code = ExitCode.USAGE_ERROR


class DimensionMismatchError(NoiseOracleError, ValueError):
    exit_code = ExitCode.USAGE_ERROR


class SamplingError(NoiseOracleError, ValueError):
    exit_code = ExitCode.USAGE_ERROR


class MissingSeedError(NoiseOracleError):
    exit_code = ExitCode.USAGE_ERROR


class InputFileError(NoiseOracleError):
    exit_code = ExitCode.USAGE_ERROR


class CorpusFormatError(NoiseOracleError, ValueError):
    """Malformed input file; `line_number` is 1-based when known."""
    exit_code = ExitCode.USAGE_ERROR

    def __init__(self, detail: str, line_number: Optional[int] = None):
        if line_number is not None:
            detail = f"line {line_number}: {detail}"
        super().__init__(detail)
        self.line_number = line_number
