"""hedgegraph utilities package"""

from .error_handling import (
    ErrorCode,
    HedgeGraphException,
    NumericalError,
    ValidationError,
    handle_exception,
)
from .vector_utils import format_float, is_symmetric, snap_weights

__all__ = [
    "ErrorCode",
    "HedgeGraphException",
    "NumericalError",
    "ValidationError",
    "handle_exception",
    "format_float",
    "is_symmetric",
    "snap_weights",
]
