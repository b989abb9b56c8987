"""
Sample moment estimators for hedgegraph
"""

import numpy as np

from ..models.estimate import CovEstimate, EstimateKind
from ..models.panel import ReturnPanel
from ..utils.error_handling import (
    ErrorCode,
    NumericalError,
    ValidationError,
    ZeroVarianceError,
)

# Rounding slack tolerated before a correlation outside [-1, 1] is an error
CORRELATION_SLACK = 1e-12


def sample_mean(panel: ReturnPanel) -> np.ndarray:
    """Column means (1/T normalization)"""
    if panel.n_rows < 1:
        raise ValidationError("Cannot average an empty panel", ErrorCode.EMPTY_PANEL)
    return panel.returns.mean(axis=0)


def sample_cov(panel: ReturnPanel) -> CovEstimate:
    """
    Unbiased sample covariance (divides by T - 1) with the paired 1/T mean.
    """
    if panel.n_rows < 2:
        raise ValidationError(
            f"Covariance needs at least 2 rows, got {panel.n_rows}",
            ErrorCode.TOO_FEW_ROWS,
        )
    mean = sample_mean(panel)
    centered = panel.returns - mean
    # Constant columns must give exactly zero variance, not rounding residue
    centered[:, np.ptp(panel.returns, axis=0) == 0] = 0.0
    matrix = centered.T @ centered / (panel.n_rows - 1)
    matrix = 0.5 * (matrix + matrix.T)
    return CovEstimate(
        tickers=panel.tickers,
        mean=mean,
        matrix=matrix,
        kind=EstimateKind.COVARIANCE,
        sample_size=panel.n_rows,
    )


def sample_corr(cov: CovEstimate) -> CovEstimate:
    """Normalize a covariance estimate to unit diagonal"""
    if cov.kind != EstimateKind.COVARIANCE:
        raise ValidationError(
            "sample_corr expects a covariance estimate",
            ErrorCode.WRONG_ESTIMATE_KIND,
        )
    variances = np.diag(cov.matrix)
    for ticker, var in zip(cov.tickers, variances, strict=True):
        if var <= 0:
            raise ZeroVarianceError(ticker)

    scale = np.sqrt(variances)
    corr = cov.matrix / np.outer(scale, scale)
    excess = np.abs(corr).max() - 1.0
    if excess > CORRELATION_SLACK:
        raise NumericalError(
            f"Correlation exceeds 1 by {excess:.3g}",
            ErrorCode.CORRELATION_OUT_OF_RANGE,
        )
    corr = np.clip(corr, -1.0, 1.0)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return CovEstimate(
        tickers=cov.tickers,
        mean=cov.mean,
        matrix=corr,
        kind=EstimateKind.CORRELATION,
        sample_size=cov.sample_size,
    )


def check_taus(tau_plus: float, tau_minus: float) -> None:
    if not 0 < tau_plus < 1 or not -1 < tau_minus < 0:
        raise ValidationError(
            f"Thresholds need 0 < tau_plus < 1 and -1 < tau_minus < 0, "
            f"got ({tau_plus}, {tau_minus})",
            ErrorCode.BAD_THRESHOLD,
            {"tau_plus": tau_plus, "tau_minus": tau_minus},
        )


def threshold(est: CovEstimate, tau_plus: float, tau_minus: float) -> CovEstimate:
    """
    Zero off-diagonal correlations inside the dead band [tau_minus, tau_plus]
    """
    check_taus(tau_plus, tau_minus)
    if est.kind != EstimateKind.CORRELATION:
        raise ValidationError(
            "Thresholds apply to correlation estimates only",
            ErrorCode.WRONG_ESTIMATE_KIND,
        )
    matrix = est.matrix.copy()
    dead = (matrix >= tau_minus) & (matrix <= tau_plus)
    np.fill_diagonal(dead, False)
    matrix[dead] = 0.0
    return CovEstimate(
        tickers=est.tickers,
        mean=est.mean,
        matrix=matrix,
        kind=est.kind,
        sample_size=est.sample_size,
    )
