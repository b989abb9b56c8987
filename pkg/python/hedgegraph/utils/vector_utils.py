"""
Vector utilities for hedgegraph
"""

import numpy as np

from ..config.settings import settings


def snap_weights(weights: np.ndarray, snap: float | None = None) -> np.ndarray:
    """
    Zero weights below ``snap`` in magnitude and rescale so they sum to one
    """
    snap = settings.WEIGHT_SNAP if snap is None else snap
    w = np.array(weights, dtype=float)
    w[np.abs(w) < snap] = 0.0
    total = w.sum()
    if total == 0:
        return w
    return w / total


def format_float(value: float, digits: int | None = None) -> str:
    """Render a float with a fixed number of significant digits"""
    digits = settings.CSV_SIGNIFICANT_DIGITS if digits is None else digits
    # Adding 0.0 turns -0.0 into 0.0
    return f"{value + 0.0:.{digits}g}"


def is_symmetric(matrix: np.ndarray, atol: float = 1e-12) -> bool:
    m = np.asarray(matrix)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.T, rtol=0, atol=atol)
