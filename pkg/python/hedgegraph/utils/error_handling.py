"""
Error handling utilities for hedgegraph
"""

from enum import Enum

import numpy as np
from pydantic import BaseModel

EXIT_OK = 0
EXIT_DATA_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


class ErrorCode(str, Enum):
    """Enumeration of error codes for the application"""

    # General errors
    GENERAL_ERROR = "GeneralError"
    VALIDATION_ERROR = "ValidationError"

    # Ingest errors
    FILE_UNREADABLE = "FileUnreadable"
    MALFORMED_INPUT = "MalformedInput"
    EMPTY_PANEL = "EmptyPanel"
    DUPLICATE_TICKER = "DuplicateTicker"
    DUPLICATE_DATE = "DuplicateDate"
    EMPTY_DIRECTORY = "EmptyDirectory"
    NO_COMMON_DATES = "NoCommonDates"
    MISSING_COLUMN = "MissingColumn"
    MISSING_TICKER = "MissingTicker"

    # Shape and range errors
    TOO_FEW_ROWS = "TooFewRows"
    TOO_FEW_ASSETS = "TooFewAssets"
    EMPTY_WINDOW = "EmptyWindow"
    DIMENSION_MISMATCH = "DimensionMismatch"
    VERTEX_OUT_OF_RANGE = "VertexOutOfRange"
    K_OUT_OF_RANGE = "KOutOfRange"
    BAD_THRESHOLD = "BadThreshold"
    WRONG_ESTIMATE_KIND = "WrongEstimateKind"

    # Estimator errors
    ZERO_VARIANCE = "ZeroVariance"

    # Allocation errors
    DEGENERATE_TARGET = "DegenerateTarget"
    INFEASIBLE_TARGET = "InfeasibleTarget"

    # Numerical failures
    NOT_PSD = "NotPSD"
    SINGULAR_COVARIANCE = "SingularCovariance"
    CORRELATION_OUT_OF_RANGE = "CorrelationOutOfRange"
    ITERATION_CAP = "IterationCap"
    KKT_VIOLATION = "KKTViolation"


class ErrorPayload(BaseModel):
    """Standardized error record for reports and JSON output"""

    code: ErrorCode
    message: str
    details: dict | None = None


class HedgeGraphException(Exception):
    """Base exception class for hedgegraph"""

    exit_code: int = EXIT_DATA_ERROR

    def __init__(
        self,
        message: str,
        error_code: ErrorCode = ErrorCode.GENERAL_ERROR,
        details: dict | None = None,
    ):
        self.message = message
        self.error_code = error_code
        self.details = details
        super().__init__(self.message)

    @property
    def tag(self) -> str:
        """Short in-report marker, e.g. ``ERR:SingularCovariance``"""
        return f"ERR:{self.error_code.value}"

    def to_payload(self) -> ErrorPayload:
        return ErrorPayload(
            code=self.error_code, message=self.message, details=self.details
        )

    def to_dict(self) -> dict:
        return self.to_payload().model_dump(mode="json")


# Specific exception classes
class ValidationError(HedgeGraphException):
    """Exception raised for invalid arguments or violated preconditions"""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode = ErrorCode.VALIDATION_ERROR,
        details: dict | None = None,
    ):
        super().__init__(message, error_code, details)


class DataError(HedgeGraphException):
    """Exception raised when input files cannot be turned into a panel"""

    def __init__(self, message: str, error_code: ErrorCode, details: dict | None = None):
        super().__init__(message, error_code, details)


class EmptyWindowError(HedgeGraphException):
    """Exception raised when a window selects no rows of a panel"""

    def __init__(self, label: str, start: str, end: str):
        message = f"Window '{label}' ({start}..{end}) selects no rows"
        details = {"label": label, "start": start, "end": end}
        super().__init__(message, ErrorCode.EMPTY_WINDOW, details)


class ZeroVarianceError(HedgeGraphException):
    """Exception raised when a correlation needs an asset with zero variance"""

    def __init__(self, ticker: str):
        message = f"Asset '{ticker}' has zero variance"
        super().__init__(message, ErrorCode.ZERO_VARIANCE, {"ticker": ticker})


class TargetError(HedgeGraphException):
    """Exception raised when a target return cannot be met"""

    def __init__(self, message: str, error_code: ErrorCode, epsilon: float, details=None):
        payload = {"epsilon": epsilon}
        payload.update(details or {})
        super().__init__(message, error_code, payload)


class NumericalError(HedgeGraphException):
    """Exception raised for singular, indefinite or otherwise unusable matrices"""

    exit_code = EXIT_NUMERICAL_ERROR

    def __init__(self, message: str, error_code: ErrorCode, details: dict | None = None):
        super().__init__(message, error_code, details)


class SolverError(NumericalError):
    """Exception raised when the quadratic solver fails to certify a solution"""


def handle_exception(exc: Exception) -> HedgeGraphException:
    """Handle an exception and return appropriate HedgeGraphException"""
    if isinstance(exc, HedgeGraphException):
        return exc
    if isinstance(exc, FileNotFoundError | PermissionError | IsADirectoryError):
        return DataError(
            f"Cannot read {exc.filename}: {exc.strerror}",
            ErrorCode.FILE_UNREADABLE,
            {"path": str(exc.filename)},
        )
    if isinstance(exc, np.linalg.LinAlgError):
        return NumericalError(f"Linear algebra failure: {exc}", ErrorCode.SINGULAR_COVARIANCE)
    if isinstance(exc, ValueError):
        return ValidationError(str(exc))
    return HedgeGraphException(f"An unexpected error occurred: {exc}")
